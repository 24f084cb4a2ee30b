#include <doctest.h>

#include <cmath>

#include "gcv/voigt.hpp"

using namespace gcv;

TEST_CASE("Fisher aStd at (1,1,0.1) reproduces the reference values") {
  const FisherInfo fi = fisher_information({1, 1, 0.1});
  // per-observation aStd; at n = 10,000 these scale to 0.0111/0.0109/0.0070
  CHECK(fi.astd[0] == doctest::Approx(0.0111 * 100).epsilon(0.02));
  CHECK(fi.astd[1] == doctest::Approx(0.0109 * 100).epsilon(0.02));
  CHECK(fi.astd[2] == doctest::Approx(0.0070 * 100).epsilon(0.02));
  CHECK(std::abs(fi.info[0][1]) <= 1e-8);
  CHECK(std::abs(fi.info[0][2]) <= 1e-8);
  CHECK(fi.equality_gap <= 1e-6);
}

TEST_CASE("Fisher aStd at (1,1,1)") {
  const FisherInfo fi = fisher_information({1, 1, 1});
  CHECK(fi.astd[0] == doctest::Approx(0.0209 * 100).epsilon(0.02));
  CHECK(fi.astd[1] == doctest::Approx(0.0391 * 100).epsilon(0.02));
  CHECK(fi.astd[2] == doctest::Approx(0.0265 * 100).epsilon(0.02));
  // positive definiteness via Sylvester minors
  const auto& I = fi.info;
  CHECK(I[0][0] > 0.0);
  CHECK(I[0][0] * I[1][1] - I[0][1] * I[1][0] > 0.0);
}

TEST_CASE("precision ratio R(lambda)") {
  double prev = precision_ratio(0.01);
  CHECK(prev > 1.0);
  for (double lam : {0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) {
    const double r = precision_ratio(lam);
    CHECK(r > 1.0);
    prev = r;
  }
  // local continuity
  const double r1 = precision_ratio(0.5);
  const double r2 = precision_ratio(0.5 * (1.0 + 1e-4));
  CHECK(std::abs(r2 - r1) <= 1e-2 * r1);
  // scale invariance: information in (sigma, gamma) is homogeneous of degree -2
  const FisherInfo a = fisher_information({0, 1, 0.7});
  const FisherInfo b = fisher_information({0, 2, 1.4});
  CHECK(b.astd[1] / b.astd[2] == doctest::Approx(a.astd[1] / a.astd[2]).epsilon(1e-6));
  CHECK_THROWS_AS((void)precision_ratio(1e-4), std::invalid_argument);
}
