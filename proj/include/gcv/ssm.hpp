#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcv/voigt.hpp"

namespace gcv {
namespace ssm {

// Measurement-error families sharing the Gaussian AR(1) state equation
//   x_t = (1-phi) mu + phi x_{t-1} + eps_t,  eps_t ~ N(0, tau^2),
//   y_t = x_t + eta_t.
enum class Family { Gaussian, Cauchy, GCC, NormalLaplace, StudentT, Huber };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct Measurement {
  Family family = Family::GCC;
  double sigma = 1.0;   // Gaussian scale (unused by Cauchy)
  double gamma = 0.1;   // Cauchy scale (GCC, Cauchy)
  double b = 0.1;       // Laplace scale (NormalLaplace)
  double nu = 5.0;      // Student-t degrees of freedom
  double k = 1.345;     // Huber threshold

  void validate() const;
  int n_params() const; // number of free measurement parameters
};

struct SsmParams {
  double mu = 0.0;
  double phi = 0.9;   // |phi| < 1
  double tau = 1.0;   // > 0
  Measurement meas;

  void validate() const;
  double stationary_var() const { return tau * tau / (1.0 - phi * phi); }
};

struct FilterStep {
  double x_pred = 0.0, h_pred = 0.0;
  double e = 0.0;          // prediction error
  double delta2 = 0.0;     // h_pred + sigma^2 where applicable (else h_pred)
  double psi = 0.0, psi_prime = 0.0;
  double x_filt = 0.0, h_filt = 0.0;
  double ll = 0.0;         // per-step criterion contribution
};

struct FilterResult {
  std::vector<FilterStep> steps;
  double loglik = 0.0;
};

// Masreliez-type forward filter for any family; Gaussian reduces to the
// Kalman filter, GCC uses the Voigt prediction-error density with
// delta_t^2 = h_pred + sigma^2.
FilterResult filter(const std::vector<double>& y, const SsmParams& params);

// GCC-specific entry point (requires Family::GCC).
FilterResult gcc_filter(const std::vector<double>& y, const SsmParams& params);

struct SmootherStep {
  double x_smooth = 0.0, h_smooth = 0.0;
  double gain = 0.0; // c_t = phi h_filt / h_pred_next (0 at t = T)
};

// Backward fixed-interval (RTS-style) pass over a completed forward filter.
std::vector<SmootherStep> smoother(const FilterResult& filtered, const SsmParams& params);

struct Decomposition {
  double e_state = 0.0;   // E[xi_t | F_t] = h psi
  double e_gauss = 0.0;   // E[Z_t  | F_t] = sigma^2 psi
  double e_cauchy = 0.0;  // E[C_t  | F_t] = e - delta^2 psi = -gamma v/u
};

// Prediction-error decomposition for a GCC filter step.
Decomposition decompose(const FilterStep& step, const SsmParams& params);

struct Simulation {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> eps;       // state innovations
  std::vector<double> noise_g;   // Gaussian measurement component (0 for Cauchy)
  std::vector<double> noise_h;   // heavy/second component (Cauchy, Laplace, ...)
};

Simulation simulate_ssm(const SsmParams& params, std::size_t T, std::uint64_t seed);

// Box for QMLE: |mu| <= mu_max, |phi| <= phi_max < 1, positive scales in
// closed intervals; nu and k likewise where the family uses them.
struct SsmBox {
  double mu_max = 1e3;
  double phi_max = 0.9999;
  double tau_min = 1e-8, tau_max = 1e3;
  double sigma_min = 1e-8, sigma_max = 1e3;
  double gamma_min = 1e-8, gamma_max = 1e3;
  double b_min = 1e-8, b_max = 1e3;
  double nu_min = 0.1, nu_max = 1e3;
  double k_min = 0.05, k_max = 50.0;

  void validate() const;
};

SsmBox default_ssm_box(const std::vector<double>& y);

struct QmleResult {
  SsmParams params_hat;
  double loglik = 0.0;
  std::vector<double> se_sandwich;   // per free parameter, natural coordinates
  std::vector<double> se_invinfo;
  std::vector<std::string> param_names;
  bool converged = false;
  bool on_boundary = false;
  int iterations = 0;
};

// Quasi-maximum likelihood over the family's prediction-error criterion.
QmleResult qmle(const std::vector<double>& y, Family family, const SsmBox& box,
                std::optional<SsmParams> init = std::nullopt);

// Monte Carlo harness over simulated GCC paths; parameter order
// (sigma, gamma, mu, phi, tau).
struct QmleMcSummary {
  std::array<double, 5> mean{};
  std::array<double, 5> std_dev{};
  std::size_t reps_used = 0;
  std::size_t reps_failed = 0;
};

QmleMcSummary qmle_mc_study(const SsmParams& true_params, std::size_t T,
                            std::size_t reps, std::uint64_t seed);

namespace detail {
// Per-step score objects for one prediction error under a family:
// psi = -d log f_e / d e, psi' its e-derivative, ll the log-density.
struct StepEval {
  double psi = 0.0, psi_prime = 0.0, ll = 0.0;
};
StepEval eval_step(double e, double h_pred, const Measurement& m);

// Total criterion with its analytic-through-recursion gradient in natural
// coordinates (GCC / Cauchy / Gaussian); parameter order as in QmleResult.
double criterion_gradient(const std::vector<double>& y, Family family,
                          const SsmParams& params, std::vector<double>& grad);
} // namespace detail

} // namespace ssm
} // namespace gcv
