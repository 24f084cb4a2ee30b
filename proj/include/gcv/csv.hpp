#pragma once

#include <string>
#include <vector>

namespace gcv {

// Minimal CSV table: comma-separated, one header row, '.' decimal point.
// Doubles are written with %.17g so every value round-trips bit-exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const; // -1 if absent
  double as_double(std::size_t row, int col) const;
};

std::string format_double(double x); // %.17g

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Series input: a CSV with a required `y` column and an optional leading
// ISO-8601 `date` column (strictly increasing when present).  Throws with the
// offending row number on non-finite or unparsable values.
struct Series {
  std::vector<std::string> dates; // empty if no date column
  std::vector<double> y;
};

Series read_series(const std::string& path);

} // namespace gcv
