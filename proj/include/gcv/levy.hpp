#pragma once

#include <array>

#include "gcv/voigt.hpp"

namespace gcv {
namespace levy {

// Brownian-plus-Cauchy increment model: over a sampling interval delta the
// increment is V(0, sigma_bm sqrt(delta), |theta| delta).
struct LevyParams {
  double sigma_bm = 1.0;   // Brownian scale, > 0
  double theta = 1.0;      // Cauchy component scale, nonzero (sign allowed)
  double delta = 1.0;      // sampling interval, > 0

  void validate() const;
  VoigtParams increment_law() const; // (0, sigma sqrt(delta), |theta| delta)
};

double increment_logpdf(double x, const LevyParams& params);

struct IncrementScore {
  double d_sigma = 0.0; // d log p / d sigma_bm
  double d_theta = 0.0; // d log p / d theta
};

IncrementScore increment_score(double x, const LevyParams& params);

// 2x2 Fisher information over (sigma_bm, theta) by the chain rule through the
// Voigt information; the location row drops out by symmetry.
std::array<std::array<double, 2>, 2> increment_fisher(const LevyParams& params);

} // namespace levy
} // namespace gcv
