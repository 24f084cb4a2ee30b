#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcv/ssm.hpp"

namespace gcv {
namespace bench {

// Raised when posterior mass reaches the grid boundary even after the
// automatic expansions.
struct grid_escape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform-grid state density; trapezoid weights (half at the endpoints).
struct GridDensity {
  double lo = 0.0, dx = 0.0;
  std::vector<double> values; // non-negative, trapezoid integral 1 after normalize
  double node(std::size_t i) const { return lo + dx * static_cast<double>(i); }
  double integral() const;
  double mean() const;
  double variance() const;
  void normalize(); // throws if total mass is not positive
};

struct GridSpec {
  int nodes = 4001;
  double state_width = 12.0;  // half-width in stationary state sd units
  double meas_width = 40.0;   // half-width contribution 40 (sigma + gamma)
  double band_sigmas = 8.0;   // transition kernel truncation, in tau units
  double escape_mass = 1e-8;  // maximum posterior mass in the outer 2% of nodes
  int max_expansions = 3;     // automatic widening retries on grid escape
  int burn_in = 50;           // steps excluded from the diagnostics
};

struct ExactStep {
  GridDensity predictive;       // pi*_{t|t-1}
  double x_pred = 0.0;          // exact predictive mean
  double h_pred = 0.0;          // exact predictive variance
  double x_filt = 0.0;          // exact posterior mean at the realized y_t
};

struct ExactFilterResult {
  std::vector<ExactStep> steps;
  int expansions_used = 0;
};

// Exact filtering by numerical density propagation: Bayes update with the
// closed-form measurement density at each node, then the Gaussian transition
// as a banded kernel product.  gamma = 0 selects the pure-Gaussian
// measurement density.
ExactFilterResult exact_filter(const std::vector<double>& y,
                               const ssm::SsmParams& params,
                               const GridSpec& spec = {});

struct KlDiagnostics {
  std::vector<double> kl_x_shape, kl_x_op, kl_y_shape, kl_y_op; // per t (after burn-in)
  double mean_x_shape = 0.0, mean_x_op = 0.0;
  double mean_y_shape = 0.0, mean_y_op = 0.0;
  double max_x_op = 0.0;
};

struct CorrectionDiagnostics {
  std::vector<double> d_shape, d_op; // realized distortions per t (after burn-in)
  double mae_shape = 0.0, mae_op = 0.0;
  double rmse_op = 0.0;
  double q95_abs_op = 0.0;
};

KlDiagnostics kl_diagnostics(const std::vector<double>& y, const ssm::SsmParams& params,
                             const GridSpec& spec = {});
CorrectionDiagnostics correction_diagnostics(const std::vector<double>& y,
                                             const ssm::SsmParams& params,
                                             const GridSpec& spec = {});

// One simulated path per design cell: lambda = gamma/sigma with sigma = 1.
struct DesignRow {
  double lambda = 0.0, phi = 0.0, tau_ratio = 0.0;
  KlDiagnostics kl;
  CorrectionDiagnostics corr;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<DesignRow> rows;
};

SweepResult design_sweep(const std::vector<double>& lambdas,
                         const std::vector<double>& phis,
                         const std::vector<double>& tau_ratios, std::size_t T,
                         std::uint64_t seed, const GridSpec& spec = {});

// Aggregated row in the layout of the main-text summary tables.
struct AggregateRow {
  double lambda = 0.0;
  double kl_x_shape = 0.0, kl_x_op = 0.0, kl_y_shape = 0.0, kl_y_op = 0.0, max_kl_x_op = 0.0;
  double mae_shape = 0.0, mae_op = 0.0, rmse_op = 0.0, q95_abs_d = 0.0;
};

std::vector<AggregateRow> aggregate_by_lambda(const SweepResult& sweep);

} // namespace bench
} // namespace gcv
