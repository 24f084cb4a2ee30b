#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gcv/voigt.hpp"

namespace gcv {

// Compact parameter region: |mu| <= mu_max, sigma and gamma in closed
// positive intervals.
struct ParamBox {
  double mu_max = 0.0;
  double sigma_min = 0.0, sigma_max = 0.0;
  double gamma_min = 0.0, gamma_max = 0.0;

  void validate() const;
  bool contains(const VoigtParams& p) const;
};

// Data-driven default: |mu| <= |median| + 10 IQR, scales in [1e-6, 1e3] IQR.
ParamBox default_box(const std::vector<double>& data);

struct MleResult {
  VoigtParams theta_hat;
  double loglik = 0.0;              // total log-likelihood at theta_hat
  std::array<double, 3> std_errors{}; // sqrt(diag I(theta_hat)^{-1} / n)
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;       // sup-norm of the mean score
  bool on_boundary = false;         // any component pinned at its box bound
};

// Maximum likelihood fit with analytic score, quasi-Newton ascent in
// (mu, log sigma, log gamma).  Throws std::invalid_argument for degenerate
// input (n < 10, non-finite values, all observations equal).
MleResult fit(const std::vector<double>& data, const ParamBox& box,
              std::optional<VoigtParams> init = std::nullopt);

// Robust starting values when init is not supplied (exposed for tests).
VoigtParams initial_guess(const std::vector<double>& data, const ParamBox& box);

// Per-parameter Monte Carlo summary over replications.
struct McSummary {
  std::array<double, 3> mean{};
  std::array<double, 3> std_dev{};   // empirical Std over replications
  std::array<double, 3> astd{};      // Fisher aStd at the true parameters, / sqrt(n)
  std::array<double, 3> alpha_left{};
  std::array<double, 3> alpha_right{};
  std::size_t n = 0;                 // sample size per replication
  std::size_t reps_requested = 0;
  std::size_t reps_used = 0;         // converged replications
  std::size_t reps_failed = 0;
};

// Replication r draws its sample from stream r of `seed`; replications run on
// a worker pool and reduce deterministically in replication order.
McSummary mc_study(const VoigtParams& true_params, std::size_t n, std::size_t reps,
                   const ParamBox& box, std::uint64_t seed);

} // namespace gcv
