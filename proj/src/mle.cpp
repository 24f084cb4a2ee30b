#include "gcv/mle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gcv/optim.hpp"
#include "gcv/parallel.hpp"
#include "gcv/rng.hpp"

namespace gcv {

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * (s.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - lo;
  return s[lo] * (1.0 - frac) + s[hi] * frac;
}

} // namespace

void ParamBox::validate() const {
  if (!(mu_max > 0.0)) throw std::invalid_argument("ParamBox: mu_max must be positive");
  if (!(sigma_min > 0.0) || !(sigma_min <= sigma_max))
    throw std::invalid_argument("ParamBox: need 0 < sigma_min <= sigma_max");
  if (!(gamma_min > 0.0) || !(gamma_min <= gamma_max))
    throw std::invalid_argument("ParamBox: need 0 < gamma_min <= gamma_max");
}

bool ParamBox::contains(const VoigtParams& p) const {
  return std::abs(p.mu) <= mu_max && p.sigma >= sigma_min && p.sigma <= sigma_max &&
         p.gamma >= gamma_min && p.gamma <= gamma_max;
}

ParamBox default_box(const std::vector<double>& data) {
  std::vector<double> s(data);
  std::sort(s.begin(), s.end());
  const double med = quantile_sorted(s, 0.5);
  double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  if (!(iqr > 0.0)) iqr = 1.0;
  ParamBox box;
  box.mu_max = std::abs(med) + 10.0 * iqr;
  box.sigma_min = 1e-6 * iqr;
  box.sigma_max = 1e3 * iqr;
  box.gamma_min = 1e-6 * iqr;
  box.gamma_max = 1e3 * iqr;
  return box;
}

VoigtParams initial_guess(const std::vector<double>& data, const ParamBox& box) {
  std::vector<double> s(data);
  std::sort(s.begin(), s.end());
  const double med = quantile_sorted(s, 0.5);
  double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  if (!(iqr > 0.0)) iqr = 1.0;

  // Gaussian-kernel density estimate around the median; gamma from the
  // half-width at half-maximum, sigma from a gamma-deflated IQR.
  const double bw = 0.9 * iqr / 1.349 * std::pow(double(s.size()), -0.2);
  auto kde = [&](double x) {
    double acc = 0.0;
    for (double yi : data) {
      const double z = (x - yi) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    return acc;
  };
  const double peak = kde(med);
  double hwhm = iqr; // fallback
  for (double x = med + 0.02 * iqr; x < med + 12.0 * iqr; x += 0.02 * iqr) {
    if (kde(x) <= 0.5 * peak) {
      hwhm = x - med;
      break;
    }
  }
  VoigtParams p;
  p.mu = std::clamp(med, -box.mu_max, box.mu_max);
  p.gamma = std::clamp(0.5 * hwhm, box.gamma_min, box.gamma_max);
  p.sigma = std::clamp(std::max(iqr / 1.349 - p.gamma, 0.25 * iqr / 1.349), box.sigma_min,
                       box.sigma_max);
  return p;
}

MleResult fit(const std::vector<double>& data, const ParamBox& box,
              std::optional<VoigtParams> init) {
  box.validate();
  if (data.size() < 10) throw std::invalid_argument("fit: need at least 10 observations");
  for (double y : data)
    if (!std::isfinite(y)) throw std::invalid_argument("fit: non-finite observation");
  if (*std::max_element(data.begin(), data.end()) ==
      *std::min_element(data.begin(), data.end()))
    throw std::invalid_argument("fit: degenerate data (all observations equal)");

  const VoigtParams start = init ? *init : initial_guess(data, box);
  const double n = static_cast<double>(data.size());

  // working coordinates (mu, log sigma, log gamma)
  const std::vector<double> lower{-box.mu_max, std::log(box.sigma_min),
                                  std::log(box.gamma_min)};
  const std::vector<double> upper{box.mu_max, std::log(box.sigma_max),
                                  std::log(box.gamma_max)};
  std::vector<double> x0{std::clamp(start.mu, lower[0], upper[0]),
                         std::clamp(std::log(start.sigma), lower[1], upper[1]),
                         std::clamp(std::log(start.gamma), lower[2], upper[2])};

  auto eval = [&](const std::vector<double>& x, std::vector<double>& g) {
    const VoigtParams p{x[0], std::exp(x[1]), std::exp(x[2])};
    double ll = 0.0, gm = 0.0, gs = 0.0, gg = 0.0;
    for (double y : data) {
      ll += log_pdf(y, p);
      const ScoreVector s = score(y, p);
      gm += s.s_mu;
      gs += s.s_sigma;
      gg += s.s_gamma;
    }
    g.assign({gm / n, p.sigma * gs / n, p.gamma * gg / n}); // chain rule to logs
    return ll / n;
  };

  const BfgsResult r = bfgs_maximize(eval, x0, lower, upper, 1e-8, 1e-10, 500);

  MleResult out;
  out.theta_hat = {r.x[0], std::exp(r.x[1]), std::exp(r.x[2])};
  out.loglik = r.fval * n;
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.gradient_norm = r.grad_norm;
  const double tol = 1e-9;
  out.on_boundary = std::abs(r.x[0] - lower[0]) < tol || std::abs(r.x[0] - upper[0]) < tol ||
                    std::abs(r.x[1] - lower[1]) < tol || std::abs(r.x[1] - upper[1]) < tol ||
                    std::abs(r.x[2] - lower[2]) < tol || std::abs(r.x[2] - upper[2]) < tol;
  out.converged = out.converged && !out.on_boundary; // converged means interior maximum
  const FisherInfo fi = fisher_information(out.theta_hat);
  for (int i = 0; i < 3; ++i) out.std_errors[i] = fi.astd[i] / std::sqrt(n);
  return out;
}

McSummary mc_study(const VoigtParams& true_params, std::size_t n, std::size_t reps,
                   const ParamBox& box, std::uint64_t seed) {
  true_params.validate();
  box.validate();
  if (reps < 1) throw std::invalid_argument("mc_study: need reps >= 1");
  if (n < 10) throw std::invalid_argument("mc_study: need n >= 10");

  struct Rep {
    std::array<double, 3> theta;
    bool ok = false;
  };
  std::vector<Rep> results(reps);

  parallel_for(reps, [&](std::size_t r) {
    Rng rng(seed, r);
    std::vector<double> data(n);
    for (auto& y : data)
      y = true_params.mu + true_params.sigma * rng.normal() + rng.cauchy(true_params.gamma);
    try {
      const MleResult m = fit(data, box, std::nullopt);
      results[r].theta = {m.theta_hat.mu, m.theta_hat.sigma, m.theta_hat.gamma};
      results[r].ok = m.converged;
    } catch (const std::exception&) {
      results[r].ok = false;
    }
  });

  McSummary s;
  s.n = n;
  s.reps_requested = reps;
  const double truth[3] = {true_params.mu, true_params.sigma, true_params.gamma};
  for (const auto& r : results) {
    if (!r.ok) continue;
    ++s.reps_used;
    for (int j = 0; j < 3; ++j) s.mean[j] += r.theta[j];
  }
  s.reps_failed = reps - s.reps_used;
  if (s.reps_used < 1) throw std::runtime_error("mc_study: no converged replications");
  for (int j = 0; j < 3; ++j) s.mean[j] /= static_cast<double>(s.reps_used);
  if (s.reps_used > 1) {
    for (const auto& r : results) {
      if (!r.ok) continue;
      for (int j = 0; j < 3; ++j) {
        const double d = r.theta[j] - s.mean[j];
        s.std_dev[j] += d * d;
      }
    }
    for (int j = 0; j < 3; ++j)
      s.std_dev[j] = std::sqrt(s.std_dev[j] / static_cast<double>(s.reps_used - 1));
  }

  const FisherInfo fi = fisher_information(true_params);
  for (int j = 0; j < 3; ++j) s.astd[j] = fi.astd[j] / std::sqrt(static_cast<double>(n));

  // tail frequencies standardized by the empirical Std
  if (s.reps_used > 1) {
    for (const auto& r : results) {
      if (!r.ok) continue;
      for (int j = 0; j < 3; ++j) {
        const double z = (r.theta[j] - truth[j]) / s.std_dev[j];
        if (z < -1.96) s.alpha_left[j] += 1.0;
        if (z > 1.96) s.alpha_right[j] += 1.0;
      }
    }
    for (int j = 0; j < 3; ++j) {
      s.alpha_left[j] /= static_cast<double>(s.reps_used);
      s.alpha_right[j] /= static_cast<double>(s.reps_used);
    }
  }
  return s;
}

} // namespace gcv
