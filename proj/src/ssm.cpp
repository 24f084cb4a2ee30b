#include "gcv/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gcv/erfcx.hpp"
#include "gcv/rng.hpp"

namespace gcv {
namespace ssm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSqrt2OverPi = 0.79788456080286535588;

// log Phi(x) via erfcx, stable for very negative x:
// Phi(x) = 0.5 erfc(-x/sqrt2) = 0.5 erfcx(-x/sqrt2) exp(-x^2/2).
double log_norm_cdf(double x) {
  if (x >= 0.0) return std::log1p(-0.5 * std::erfc(x / std::sqrt(2.0)));
  return std::log(0.5 * erfcx_real(-x / std::sqrt(2.0))) - 0.5 * x * x;
}

double huber_normalizer(double k) {
  return std::sqrt(2.0 * 3.14159265358979323846) * std::erf(k / std::sqrt(2.0)) +
         2.0 / k * std::exp(-0.5 * k * k);
}

} // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Cauchy: return "cauchy";
    case Family::GCC: return "gcc";
    case Family::NormalLaplace: return "normal-laplace";
    case Family::StudentT: return "student-t";
    case Family::Huber: return "huber";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "cauchy") return Family::Cauchy;
  if (name == "gcc") return Family::GCC;
  if (name == "normal-laplace" || name == "nl") return Family::NormalLaplace;
  if (name == "student-t" || name == "t") return Family::StudentT;
  if (name == "huber") return Family::Huber;
  throw std::invalid_argument("unknown measurement family '" + name + "'");
}

void Measurement::validate() const {
  auto pos = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("Measurement: ") + what + " must be positive");
  };
  switch (family) {
    case Family::Gaussian: pos(sigma, "sigma"); break;
    case Family::Cauchy: pos(gamma, "gamma"); break;
    case Family::GCC: pos(sigma, "sigma"); pos(gamma, "gamma"); break;
    case Family::NormalLaplace: pos(sigma, "sigma"); pos(b, "laplace scale"); break;
    case Family::StudentT: pos(sigma, "sigma"); pos(nu, "nu"); break;
    case Family::Huber: pos(sigma, "sigma"); pos(k, "k"); break;
  }
}

int Measurement::n_params() const {
  switch (family) {
    case Family::Gaussian: return 1;
    case Family::Cauchy: return 1;
    case Family::GCC: return 2;
    case Family::NormalLaplace: return 2;
    case Family::StudentT: return 2;
    case Family::Huber: return 2;
  }
  return 0;
}

void SsmParams::validate() const {
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("SsmParams: need |phi| < 1");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("SsmParams: tau must be positive");
  if (!std::isfinite(mu)) throw std::invalid_argument("SsmParams: mu must be finite");
  meas.validate();
}

namespace detail {

StepEval eval_step(double e, double h_pred, const Measurement& m) {
  StepEval out;
  switch (m.family) {
    case Family::Gaussian: {
      const double d2 = h_pred + m.sigma * m.sigma;
      out.psi = e / d2;
      out.psi_prime = 1.0 / d2;
      out.ll = -0.5 * (kLog2Pi + std::log(d2) + e * e / d2);
      return out;
    }
    case Family::Cauchy: {
      const auto c = gcv::detail::line_core(e, std::sqrt(h_pred), m.gamma);
      out.psi = c.psi;
      out.psi_prime = c.psi_prime;
      out.ll = -0.5 * kLog2Pi - 0.5 * std::log(h_pred) + c.log_u;
      return out;
    }
    case Family::GCC: {
      const double d2 = h_pred + m.sigma * m.sigma;
      const double d = std::sqrt(d2);
      const auto c = gcv::detail::line_core(e, d, m.gamma);
      out.psi = c.psi;
      out.psi_prime = c.psi_prime;
      out.ll = -0.5 * kLog2Pi - std::log(d) + c.log_u;
      return out;
    }
    case Family::NormalLaplace: {
      // f(e) = (1/2b) exp(s^2/2b^2) [e^{-e/b} Phi(e/s - s/b) + e^{e/b} Phi(-e/s - s/b)]
      const double s = std::sqrt(h_pred + m.sigma * m.sigma);
      const double b = m.b;
      const double lA = -e / b + log_norm_cdf(e / s - s / b);
      const double lB = e / b + log_norm_cdf(-e / s - s / b);
      const double lmax = std::max(lA, lB);
      const double ea = std::exp(lA - lmax), eb = std::exp(lB - lmax);
      out.ll = -std::log(2.0 * b) + 0.5 * (s / b) * (s / b) + lmax + std::log(ea + eb);
      // psi = (1/b)(A - B)/(A + B); psi' = psi^2 - 1/b^2 + phi(e/s)/(b^2 s f)
      out.psi = (ea - eb) / (ea + eb) / b;
      const double log_phi_es = -0.5 * (e / s) * (e / s) - 0.5 * kLog2Pi;
      out.psi_prime = out.psi * out.psi - 1.0 / (b * b) +
                      std::exp(log_phi_es - out.ll) / (b * b * s);
      return out;
    }
    case Family::StudentT: {
      const double s2 = h_pred + m.sigma * m.sigma;
      const double nu = m.nu;
      const double q = nu * s2 + e * e;
      out.psi = (nu + 1.0) * e / q;
      out.psi_prime = (nu + 1.0) * (nu * s2 - e * e) / (q * q);
      out.ll = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
               0.5 * std::log(nu * 3.14159265358979323846 * s2) -
               0.5 * (nu + 1.0) * std::log1p(e * e / (nu * s2));
      return out;
    }
    case Family::Huber: {
      const double s = std::sqrt(h_pred + m.sigma * m.sigma);
      const double k = m.k;
      const double r = e / s;
      out.ll = -std::log(s * huber_normalizer(k));
      if (std::abs(r) <= k) {
        out.ll += -0.5 * r * r;
        out.psi = e / (s * s);
        out.psi_prime = 1.0 / (s * s); // one-sided value also used at |r| = k
      } else {
        out.ll += -(k * std::abs(r) - 0.5 * k * k);
        out.psi = k * (r > 0 ? 1.0 : -1.0) / s;
        out.psi_prime = 0.0;
      }
      return out;
    }
  }
  throw std::logic_error("eval_step: unreachable");
}

} // namespace detail

FilterResult filter(const std::vector<double>& y, const SsmParams& params) {
  params.validate();
  if (y.empty()) throw std::invalid_argument("filter: empty series");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("filter: non-finite observation");

  FilterResult out;
  out.steps.resize(y.size());
  double x_prev = params.mu;
  double h_prev = params.stationary_var();
  const double sig2 = (params.meas.family == Family::Cauchy)
                          ? 0.0
                          : params.meas.sigma * params.meas.sigma;
  for (std::size_t t = 0; t < y.size(); ++t) {
    FilterStep& st = out.steps[t];
    if (t == 0) {
      st.x_pred = x_prev; // stationary initialization x_{1|0} = mu
      st.h_pred = h_prev; // h_{1|0} = tau^2/(1-phi^2)
    } else {
      st.x_pred = (1.0 - params.phi) * params.mu + params.phi * x_prev;
      st.h_pred = params.phi * params.phi * h_prev + params.tau * params.tau;
    }
    st.e = y[t] - st.x_pred;
    st.delta2 = st.h_pred + sig2;
    const auto ev = detail::eval_step(st.e, st.h_pred, params.meas);
    st.psi = ev.psi;
    st.psi_prime = ev.psi_prime;
    st.ll = ev.ll;
    st.x_filt = st.x_pred + st.h_pred * st.psi;
    st.h_filt = st.h_pred - st.h_pred * st.h_pred * st.psi_prime;
    // The GCC/Gaussian/Cauchy updates keep h_filt > 0 by construction; the
    // same-family Student-t and Huber approximations can overshoot for
    // extreme parameter combinations, so floor them.
    if (st.h_filt <= 0.0) st.h_filt = 1e-12 * st.h_pred;
    out.loglik += st.ll;
    x_prev = st.x_filt;
    h_prev = st.h_filt;
  }
  return out;
}

FilterResult gcc_filter(const std::vector<double>& y, const SsmParams& params) {
  if (params.meas.family != Family::GCC)
    throw std::invalid_argument("gcc_filter: measurement family must be GCC");
  return filter(y, params);
}

std::vector<SmootherStep> smoother(const FilterResult& filtered, const SsmParams& params) {
  params.validate();
  const auto& steps = filtered.steps;
  if (steps.empty()) throw std::invalid_argument("smoother: empty filter output");
  const std::size_t T = steps.size();
  std::vector<SmootherStep> out(T);
  out[T - 1].x_smooth = steps[T - 1].x_filt;
  out[T - 1].h_smooth = steps[T - 1].h_filt;
  out[T - 1].gain = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    const double c = params.phi * steps[t].h_filt / steps[t + 1].h_pred;
    out[t].gain = c;
    out[t].x_smooth =
        steps[t].x_filt + c * (out[t + 1].x_smooth - steps[t + 1].x_pred);
    out[t].h_smooth =
        steps[t].h_filt + c * c * (out[t + 1].h_smooth - steps[t + 1].h_pred);
  }
  return out;
}

Decomposition decompose(const FilterStep& step, const SsmParams& params) {
  params.validate();
  if (params.meas.family != Family::GCC)
    throw std::invalid_argument("decompose: measurement family must be GCC");
  Decomposition d;
  d.e_state = step.h_pred * step.psi;
  d.e_gauss = params.meas.sigma * params.meas.sigma * step.psi;
  d.e_cauchy = step.e - step.delta2 * step.psi; // = -gamma v/u
  return d;
}

Simulation simulate_ssm(const SsmParams& params, std::size_t T, std::uint64_t seed) {
  params.validate();
  if (T < 1) throw std::invalid_argument("simulate_ssm: need T >= 1");
  Rng rng(seed, 0);
  Simulation sim;
  sim.y.resize(T);
  sim.x.resize(T);
  sim.eps.resize(T);
  sim.noise_g.resize(T);
  sim.noise_h.resize(T);
  const Measurement& m = params.meas;
  double x = params.mu + std::sqrt(params.stationary_var()) * rng.normal();
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      sim.eps[t] = params.tau * rng.normal();
      x = (1.0 - params.phi) * params.mu + params.phi * sim.x[t - 1] + sim.eps[t];
    } else {
      sim.eps[0] = 0.0; // x_1 drawn from the stationary law directly
    }
    sim.x[t] = x;
    double g = 0.0, hn = 0.0;
    switch (m.family) {
      case Family::Gaussian: g = m.sigma * rng.normal(); break;
      case Family::Cauchy: hn = rng.cauchy(m.gamma); break;
      case Family::GCC:
        g = m.sigma * rng.normal();
        hn = rng.cauchy(m.gamma);
        break;
      case Family::NormalLaplace: {
        g = m.sigma * rng.normal();
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        hn = sign * rng.exponential(1.0 / m.b);
        break;
      }
      case Family::StudentT: hn = m.sigma * rng.student_t(m.nu); break;
      case Family::Huber: {
        // Gaussian core truncated at |r| <= k plus exponential tails
        const double k = m.k;
        const double core_mass =
            std::sqrt(2.0 * 3.14159265358979323846) * std::erf(k / std::sqrt(2.0)) /
            huber_normalizer(k);
        if (rng.uniform() < core_mass) {
          double z;
          do {
            z = rng.normal();
          } while (std::abs(z) > k);
          hn = m.sigma * z;
        } else {
          const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
          hn = m.sigma * sign * (k + rng.exponential(k));
        }
        break;
      }
    }
    sim.noise_g[t] = g;
    sim.noise_h[t] = hn;
    sim.y[t] = x + g + hn;
  }
  return sim;
}

void SsmBox::validate() const {
  if (!(mu_max > 0.0) || !(phi_max > 0.0) || !(phi_max < 1.0))
    throw std::invalid_argument("SsmBox: bad mu_max/phi_max");
  auto chk = [](double lo, double hi, const char* what) {
    if (!(lo > 0.0) || !(lo <= hi))
      throw std::invalid_argument(std::string("SsmBox: bad range for ") + what);
  };
  chk(tau_min, tau_max, "tau");
  chk(sigma_min, sigma_max, "sigma");
  chk(gamma_min, gamma_max, "gamma");
  chk(b_min, b_max, "b");
  chk(nu_min, nu_max, "nu");
  chk(k_min, k_max, "k");
}

SsmBox default_ssm_box(const std::vector<double>& y) {
  std::vector<double> s(y);
  std::sort(s.begin(), s.end());
  double iqr = s[static_cast<std::size_t>(0.75 * (s.size() - 1))] -
               s[static_cast<std::size_t>(0.25 * (s.size() - 1))];
  if (!(iqr > 0.0)) iqr = 1.0;
  const double med = s[s.size() / 2];
  SsmBox box;
  box.mu_max = std::abs(med) + 10.0 * iqr;
  box.phi_max = 0.9999;
  box.tau_min = box.sigma_min = box.gamma_min = box.b_min = 1e-6 * iqr;
  box.tau_max = box.sigma_max = box.gamma_max = box.b_max = 1e3 * iqr;
  return box;
}

} // namespace ssm
} // namespace gcv
