#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace gcv {

// Parameters of the Gauss-Cauchy convolution V(mu, sigma, gamma):
// Y = mu + Z + X with Z ~ N(0, sigma^2) and X ~ Cauchy(0, gamma) independent.
struct VoigtParams {
  double mu = 0.0;
  double sigma = 1.0;
  double gamma = 1.0;

  void validate() const; // throws std::invalid_argument on violation
};

struct ScoreVector {
  double s_mu = 0.0;
  double s_sigma = 0.0;
  double s_gamma = 0.0;
};

// Symmetric 3x3 Hessian of the log-density, ordered (mu, sigma, gamma).
struct HessianMatrix {
  double mm = 0.0, ms = 0.0, mg = 0.0, ss = 0.0, sg = 0.0, gg = 0.0;
  double operator()(int i, int j) const;
};

struct ConditionalMoments {
  double mean = 0.0;     // E[Z | Y = y]
  double variance = 0.0; // V(Z | Y = y) > 0
};

// erfcx components on the Voigt line w = (gamma + i (y - mu)) / (sigma sqrt 2).
struct VoigtLineValue {
  double u = 0.0; // Re erfcx, strictly positive
  double v = 0.0; // Im erfcx
};

VoigtLineValue voigt_line_eval(double y, const VoigtParams& params);

double pdf(double y, const VoigtParams& params);
double pdf_mills(double y, const VoigtParams& params); // complex-Mills-ratio route
double log_pdf(double y, const VoigtParams& params);
ScoreVector score(double y, const VoigtParams& params);
HessianMatrix hessian(double y, const VoigtParams& params);
ConditionalMoments conditional_moments(double y, const VoigtParams& params);

// f_{Z|Y}(z | y): density of the latent Gaussian component given Y = y.
double conditional_density_z_given_y(double z, double y, const VoigtParams& params);

// Conditional cumulants kappa_1..kappa_max_order of Z | Y = y, max_order in {3,4}.
std::vector<double> conditional_cumulants(double y, const VoigtParams& params,
                                          int max_order);

struct FisherInfo {
  std::array<std::array<double, 3>, 3> info{};      // E[s s'], order (mu, sigma, gamma)
  std::array<std::array<double, 3>, 3> inverse{};
  std::array<double, 3> astd{};                     // sqrt(diag inverse), per observation
  std::array<std::array<double, 3>, 3> neg_mean_hessian{}; // -E[H]
  double equality_gap = 0.0;                        // max |E[ss'] + E[H]|
};

// Fisher information by tan-substituted Gauss-Legendre quadrature.  Also
// evaluates -E[H] and records the information-matrix-equality gap.
FisherInfo fisher_information(const VoigtParams& params);

// R(lambda) = aStd(sigma) / aStd(gamma) at (mu, sigma, gamma) = (0, 1, lambda).
double precision_ratio(double lambda);

// n iid draws from V(params); deterministic given (seed, stream 0).
std::vector<double> sample(const VoigtParams& params, std::size_t n,
                           std::uint64_t seed);

struct StudentTApprox {
  double scale = 0.0;
  double dof = 0.0;
};
struct PseudoVoigtApprox {
  double eta = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
};
struct BestApproximations {
  StudentTApprox student_t;
  PseudoVoigtApprox pseudo_voigt;
  double kl_student_t = 0.0;
  double kl_pseudo_voigt = 0.0;
};

// KL-minimizing Student-t and pseudo-Voigt approximations to V(params).
BestApproximations best_approximations(const VoigtParams& params);

namespace detail {

// Stable evaluation of the line quantities used everywhere downstream.
// psi = -(d/dy) log f   (the location score s_mu),
// psi_prime = d psi / dy (= -H_mumu).
// For (y-mu)^2 + gamma^2 >= (28 sigma)^2 the closed forms are rearranged via
// the scaled asymptotic series so every field keeps relative accuracy; the
// direct erfcx route takes over in the central region.
struct LineCore {
  double u = 0.0;
  double v = 0.0;
  double log_u = 0.0;
  double r = 0.0;         // v / u
  double psi = 0.0;
  double psi_prime = 0.0;
  bool tail_branch = false;
  double P = 0.0, Q = 0.0, D = 0.0; // series variables, tail branch only
};

LineCore line_core(double y_centered, double sigma, double gamma);

// Scale scores s_sigma, s_gamma for centered observation; tail-stable.
void scale_scores(const LineCore& c, double y_centered, double sigma,
                  double gamma, double& s_sigma, double& s_gamma);

// Internal CDF by quadrature of the density (test oracle support and
// sampling checks; not part of the public distribution API).
double cdf_by_quadrature(double y, const VoigtParams& params);

} // namespace detail

} // namespace gcv
