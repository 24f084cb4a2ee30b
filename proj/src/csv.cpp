#include "gcv/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gcv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

double CsvTable::as_double(std::size_t row, int col) const {
  const std::string& s = rows.at(row).at(col);
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("csv: bad numeric field '" + s + "'");
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
    if (t.rows.back().size() != t.header.size())
      throw std::runtime_error("csv: ragged row in " + path);
  }
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < table.header.size(); ++i)
    out << table.header[i] << (i + 1 < table.header.size() ? "," : "\n");
  for (const auto& row : table.rows)
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

Series read_series(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int ycol = t.column("y");
  if (ycol < 0) throw std::runtime_error(path + ": no 'y' column");
  const int dcol = t.column("date");
  Series s;
  s.y.reserve(t.rows.size());
  std::string prev_date;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    double v;
    try {
      v = t.as_double(r, ycol);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": unparsable y at data row " + std::to_string(r + 1));
    }
    if (!std::isfinite(v))
      throw std::runtime_error(path + ": non-finite y at data row " + std::to_string(r + 1));
    s.y.push_back(v);
    if (dcol >= 0) {
      const std::string& d = t.rows[r][dcol];
      if (!prev_date.empty() && !(prev_date < d))
        throw std::runtime_error(path + ": dates not strictly increasing at data row " +
                                 std::to_string(r + 1));
      prev_date = d;
      s.dates.push_back(d);
    }
  }
  if (s.y.empty()) throw std::runtime_error(path + ": no data rows");
  return s;
}

} // namespace gcv
