#include "gcv/levy.hpp"

#include <cmath>
#include <stdexcept>

namespace gcv {
namespace levy {

void LevyParams::validate() const {
  if (!(sigma_bm > 0.0) || !std::isfinite(sigma_bm))
    throw std::invalid_argument("LevyParams: sigma_bm must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("LevyParams: delta must be positive");
  if (!(theta != 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("LevyParams: theta must be nonzero (Voigt boundary)");
}

VoigtParams LevyParams::increment_law() const {
  return {0.0, sigma_bm * std::sqrt(delta), std::abs(theta) * delta};
}

double increment_logpdf(double x, const LevyParams& params) {
  params.validate();
  return log_pdf(x, params.increment_law());
}

IncrementScore increment_score(double x, const LevyParams& params) {
  params.validate();
  const ScoreVector s = score(x, params.increment_law());
  IncrementScore out;
  out.d_sigma = std::sqrt(params.delta) * s.s_sigma;
  out.d_theta = params.delta * s.s_gamma * (params.theta > 0.0 ? 1.0 : -1.0);
  return out;
}

std::array<std::array<double, 2>, 2> increment_fisher(const LevyParams& params) {
  params.validate();
  const FisherInfo fi = fisher_information(params.increment_law());
  const double sd = std::sqrt(params.delta);
  const double sg = params.theta > 0.0 ? 1.0 : -1.0;
  // J maps (sigma_bm, theta) into the (sigma_V, gamma_V) block; the mu row is
  // zero by the block diagonality of the Voigt information.
  std::array<std::array<double, 2>, 2> out{};
  out[0][0] = params.delta * fi.info[1][1];
  out[0][1] = out[1][0] = sd * params.delta * sg * fi.info[1][2];
  out[1][1] = params.delta * params.delta * fi.info[2][2];
  return out;
}

} // namespace levy
} // namespace gcv
