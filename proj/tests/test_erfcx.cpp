#include <doctest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "gcv/erfcx.hpp"
#include "gcv/rng.hpp"
#include "gcv/voigt.hpp"

using gcv::erfcx;
using gcv::erfcx_derivative;
using cplx = std::complex<double>;

namespace {

struct OracleRow {
  double a, b, u, v;
};

std::vector<OracleRow> load_oracle(const char* name) {
  std::ifstream in(std::string(GCV_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  std::vector<OracleRow> rows;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    OracleRow r{};
    ss >> r.a >> r.b >> r.u >> r.v;
    rows.push_back(r);
  }
  return rows;
}

double rel_err(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / denom;
}

} // namespace

TEST_CASE("erfcx matches the high-precision oracle to 1e-12 componentwise") {
  const auto rows = load_oracle("erfcx_oracle.csv");
  REQUIRE(rows.size() >= 2000);
  double worst_u = 0.0, worst_v = 0.0;
  for (const auto& r : rows) {
    const cplx z = erfcx({r.a, r.b});
    // values below the representable floor compare against the floor
    double eu = rel_err(z.real(), r.u);
    double ev = rel_err(z.imag(), r.v);
    if (std::abs(r.u) < 1e-290) eu = std::abs(z.real() - r.u) / 1e-290;
    if (std::abs(r.v) < 1e-290) ev = std::abs(z.imag() - r.v) / 1e-290;
    worst_u = std::max(worst_u, eu);
    worst_v = std::max(worst_v, ev);
  }
  CHECK(worst_u <= 1e-12);
  CHECK(worst_v <= 1e-12);
}

TEST_CASE("erfcx spot values") {
  CHECK(erfcx({0.0, 0.0}) == cplx{1.0, 0.0});
  CHECK(rel_err(erfcx({1.0, 0.0}).real(), 0.42758357615580700441) < 1e-14);
  // erfcx(1/sqrt 2), the value entering the V(0,1,1) mode density
  CHECK(rel_err(erfcx({0.70710678118654752, 0.0}).real(), 0.52315658373024674336) < 1e-14);
  CHECK(erfcx({1.0, 0.0}).imag() == 0.0);
}

TEST_CASE("erfcx on the imaginary axis has exact real part exp(-beta^2)") {
  for (double beta : {0.25, 1.0, 3.0, 10.0, 25.0}) {
    const cplx z = erfcx({0.0, beta});
    CHECK(z.real() == std::exp(-beta * beta));
  }
}

TEST_CASE("erfcx rejects the left half-plane and non-finite input") {
  CHECK_THROWS_AS((void)erfcx({-0.1, 1.0}), std::domain_error);
  CHECK_THROWS_AS((void)erfcx({std::nan(""), 0.0}), std::domain_error);
  CHECK_THROWS_AS((void)erfcx({0.0, std::numeric_limits<double>::infinity()}),
                  std::domain_error);
}

TEST_CASE("closure identity against complex central differences") {
  gcv::Rng rng(41, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp(rng.uniform() * 8.0 - 4.0);
    const double b = (rng.uniform() * 2.0 - 1.0) * 15.0;
    const cplx w(a, b);
    const double h = 1e-6 * (1.0 + std::abs(w));
    const cplx d_num = (erfcx(w + h) - erfcx(w - h)) / (2.0 * h);
    const cplx d_closed = 2.0 * w * erfcx(w) - 2.0 / std::sqrt(M_PI);
    worst = std::max(worst, std::abs(d_num - d_closed) / (1.0 + std::abs(d_closed)));
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("conjugation symmetry") {
  gcv::Rng rng(42, 0);
  for (int i = 0; i < 300; ++i) {
    const double a = std::exp(rng.uniform() * 10.0 - 6.0);
    const double b = std::exp(rng.uniform() * 10.0 - 5.0);
    const cplx z1 = erfcx({a, b});
    const cplx z2 = erfcx({a, -b});
    CHECK(rel_err(z2.real(), z1.real()) < 1e-14);
    CHECK(std::abs(z2.imag() + z1.imag()) <=
          1e-14 * std::max(std::abs(z1.imag()), 1e-300));
  }
}

TEST_CASE("positivity of u on the Voigt line across the stress ranges") {
  gcv::Rng rng(43, 0);
  for (int i = 0; i < 2000; ++i) {
    const double sigma = std::pow(10.0, rng.uniform() * 12.0 - 8.0); // 1e-8..1e4
    const double gamma = std::pow(10.0, rng.uniform() * 12.0 - 8.0);
    const double y = (rng.uniform() * 2.0 - 1.0) * 1e6 * sigma;
    const auto lv = gcv::voigt_line_eval(y, {0.0, sigma, gamma});
    CHECK(lv.u > 0.0);
  }
}

TEST_CASE("Gaussian tail identity Pr(|Z|>r) = erfcx(r/sqrt2) exp(-r^2/2)") {
  gcv::Rng rng(44, 0);
  for (int i = 0; i < 200; ++i) {
    const double r = 0.05 + 10.0 * rng.uniform();
    const double lhs = std::erfc(r / std::sqrt(2.0)); // independent libm route
    const double rhs = gcv::erfcx_real(r / std::sqrt(2.0)) * std::exp(-0.5 * r * r);
    CHECK(rel_err(rhs, lhs) < 1e-12);
  }
}

TEST_CASE("derivative recursion against the high-precision oracle") {
  const auto rows = load_oracle("erfcx_derivative_oracle.csv");
  std::ifstream in(std::string(GCV_FIXTURE_DIR) + "/erfcx_derivative_oracle.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b, re, im;
    int order;
    ss >> a >> b >> order >> re >> im;
    const cplx d = erfcx_derivative({a, b}, order);
    CHECK(std::abs(d - cplx{re, im}) <= 1e-11 * (1.0 + std::abs(cplx{re, im})));
  }
}

TEST_CASE("derivative spot values") {
  const cplx d1 = erfcx_derivative({0.0, 0.0}, 1);
  CHECK(rel_err(d1.real(), -1.1283791670955126) < 1e-14);
  const cplx d1b = erfcx_derivative({1.0, 0.0}, 1);
  CHECK(rel_err(d1b.real(), 2.0 * 0.42758357615580700441 - 1.1283791670955126) < 1e-12);
  // n = 2 against a central difference of the first derivative
  gcv::Rng rng(45, 0);
  for (int i = 0; i < 50; ++i) {
    const cplx w(std::exp(rng.uniform() * 2 - 1), rng.normal());
    const double h = 1e-5;
    const cplx num = (erfcx_derivative(w + h, 1) - erfcx_derivative(w - h, 1)) / (2.0 * h);
    const cplx d2 = erfcx_derivative(w, 2);
    CHECK(std::abs(num - d2) <= 1e-6 * (1.0 + std::abs(d2)));
  }
  CHECK_THROWS_AS((void)erfcx_derivative({1.0, 0.0}, 7), std::invalid_argument);
  CHECK_THROWS_AS((void)erfcx_derivative({1.0, 0.0}, 0), std::invalid_argument);
}

TEST_CASE("voigt_line_eval symmetry and center values") {
  const gcv::VoigtParams p{0.7, 1.3, 0.4};
  const auto center = gcv::voigt_line_eval(p.mu, p);
  CHECK(std::abs(center.v) <= 1e-14);
  for (double r : {0.3, 2.0, 11.0}) {
    const auto up = gcv::voigt_line_eval(p.mu + r, p);
    const auto dn = gcv::voigt_line_eval(p.mu - r, p);
    CHECK(up.u == doctest::Approx(dn.u).epsilon(1e-14));
    CHECK(up.v == doctest::Approx(-dn.v).epsilon(1e-14));
  }
  const auto v011 = gcv::voigt_line_eval(0.0, {0.0, 1.0, 1.0});
  CHECK(rel_err(v011.u, 0.52315658373024674336) < 1e-13);
  CHECK_THROWS_AS((void)gcv::voigt_line_eval(0.0, {0.0, -1.0, 1.0}), std::invalid_argument);
}
