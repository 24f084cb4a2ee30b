#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

#include "gcv/erfcx.hpp"
#include "gcv/optim.hpp"
#include "gcv/parallel.hpp"
#include "gcv/rng.hpp"
#include "gcv/ssm.hpp"

namespace gcv {
namespace ssm {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
using cplx = std::complex<double>;

// Natural-coordinate parameter vector layout per family:
//   GCC:           (mu, phi, tau, sigma, gamma)
//   Gaussian:      (mu, phi, tau, sigma)
//   Cauchy:        (mu, phi, tau, gamma)
//   NormalLaplace: (mu, phi, tau, sigma, b)
//   StudentT:      (mu, phi, tau, sigma, nu)
//   Huber:         (mu, phi, tau, sigma, k)
std::vector<std::string> param_names_for(Family f) {
  switch (f) {
    case Family::GCC: return {"mu", "phi", "tau", "sigma", "gamma"};
    case Family::Gaussian: return {"mu", "phi", "tau", "sigma"};
    case Family::Cauchy: return {"mu", "phi", "tau", "gamma"};
    case Family::NormalLaplace: return {"mu", "phi", "tau", "sigma", "b"};
    case Family::StudentT: return {"mu", "phi", "tau", "sigma", "nu"};
    case Family::Huber: return {"mu", "phi", "tau", "sigma", "k"};
  }
  throw std::logic_error("param_names_for");
}

SsmParams vector_to_params(Family f, const std::vector<double>& v) {
  SsmParams p;
  p.meas.family = f;
  p.mu = v[0];
  p.phi = v[1];
  p.tau = v[2];
  switch (f) {
    case Family::GCC: p.meas.sigma = v[3]; p.meas.gamma = v[4]; break;
    case Family::Gaussian: p.meas.sigma = v[3]; break;
    case Family::Cauchy: p.meas.gamma = v[3]; break;
    case Family::NormalLaplace: p.meas.sigma = v[3]; p.meas.b = v[4]; break;
    case Family::StudentT: p.meas.sigma = v[3]; p.meas.nu = v[4]; break;
    case Family::Huber: p.meas.sigma = v[3]; p.meas.k = v[4]; break;
  }
  return p;
}

std::vector<double> params_to_vector(const SsmParams& p) {
  switch (p.meas.family) {
    case Family::GCC: return {p.mu, p.phi, p.tau, p.meas.sigma, p.meas.gamma};
    case Family::Gaussian: return {p.mu, p.phi, p.tau, p.meas.sigma};
    case Family::Cauchy: return {p.mu, p.phi, p.tau, p.meas.gamma};
    case Family::NormalLaplace: return {p.mu, p.phi, p.tau, p.meas.sigma, p.meas.b};
    case Family::StudentT: return {p.mu, p.phi, p.tau, p.meas.sigma, p.meas.nu};
    case Family::Huber: return {p.mu, p.phi, p.tau, p.meas.sigma, p.meas.k};
  }
  throw std::logic_error("params_to_vector");
}

// Bounds on the natural parameter vector.
void natural_bounds(Family f, const SsmBox& box, std::vector<double>& lo,
                    std::vector<double>& hi) {
  lo = {-box.mu_max, -box.phi_max, box.tau_min};
  hi = {box.mu_max, box.phi_max, box.tau_max};
  auto push = [&](double l, double h) {
    lo.push_back(l);
    hi.push_back(h);
  };
  switch (f) {
    case Family::GCC:
      push(box.sigma_min, box.sigma_max);
      push(box.gamma_min, box.gamma_max);
      break;
    case Family::Gaussian: push(box.sigma_min, box.sigma_max); break;
    case Family::Cauchy: push(box.gamma_min, box.gamma_max); break;
    case Family::NormalLaplace:
      push(box.sigma_min, box.sigma_max);
      push(box.b_min, box.b_max);
      break;
    case Family::StudentT:
      push(box.sigma_min, box.sigma_max);
      push(box.nu_min, box.nu_max);
      break;
    case Family::Huber:
      push(box.sigma_min, box.sigma_max);
      push(box.k_min, box.k_max);
      break;
  }
}

// Transformed working coordinates: mu raw, phi -> atanh(phi/phi_max),
// all positive parameters -> log.
std::vector<double> to_working(const std::vector<double>& nat, double phi_max) {
  std::vector<double> w(nat.size());
  w[0] = nat[0];
  w[1] = std::atanh(std::clamp(nat[1] / phi_max, -1.0 + 1e-12, 1.0 - 1e-12));
  for (size_t i = 2; i < nat.size(); ++i) w[i] = std::log(nat[i]);
  return w;
}

std::vector<double> from_working(const std::vector<double>& w, double phi_max) {
  std::vector<double> nat(w.size());
  nat[0] = w[0];
  nat[1] = phi_max * std::tanh(w[1]);
  for (size_t i = 2; i < w.size(); ++i) nat[i] = std::exp(w[i]);
  return nat;
}

// ---------------------------------------------------------------------------
// Analytic per-step derivatives for the Voigt-type families (GCC and Cauchy):
// all partials of psi and psi' with respect to (e, delta, gamma) follow from
// the erfcx closure identities through e'(w), e''(w), e'''(w).
struct VoigtStepDerivs {
  double psi, psi_prime;
  double dpsi_de, dpsi_ddelta, dpsi_dgamma;
  double dpsip_de, dpsip_ddelta, dpsip_dgamma;
  double dll_de, dll_ddelta, dll_dgamma; // log-density partials
};

VoigtStepDerivs voigt_step_derivs(double e, double delta, double gamma) {
  VoigtStepDerivs d{};
  const double rho2 = e * e + gamma * gamma;
  if (rho2 >= 784.0 * delta * delta) {
    // Far-tail steps: the closure forms cancel catastrophically, so take the
    // partials by central differences of the tail-stable kernel instead.
    const auto core = gcv::detail::line_core(e, delta, gamma);
    d.psi = core.psi;
    d.psi_prime = core.psi_prime;
    double ssig, sgam;
    gcv::detail::scale_scores(core, e, delta, gamma, ssig, sgam);
    d.dll_de = -core.psi;
    d.dll_ddelta = ssig;
    d.dll_dgamma = sgam;
    d.dpsi_de = core.psi_prime;
    const double he = 1e-6 * std::max({std::abs(e), gamma, delta});
    const double hd = 1e-6 * delta;
    const double hg = 1e-6 * gamma;
    auto pp = [](const gcv::detail::LineCore& c) { return c.psi; };
    auto qq = [](const gcv::detail::LineCore& c) { return c.psi_prime; };
    const auto ce_p = gcv::detail::line_core(e + he, delta, gamma);
    const auto ce_m = gcv::detail::line_core(e - he, delta, gamma);
    const auto cd_p = gcv::detail::line_core(e, delta + hd, gamma);
    const auto cd_m = gcv::detail::line_core(e, delta - hd, gamma);
    const auto cg_p = gcv::detail::line_core(e, delta, gamma + hg);
    const auto cg_m = gcv::detail::line_core(e, delta, gamma - hg);
    d.dpsi_ddelta = (pp(cd_p) - pp(cd_m)) / (2.0 * hd);
    d.dpsi_dgamma = (pp(cg_p) - pp(cg_m)) / (2.0 * hg);
    d.dpsip_de = (qq(ce_p) - qq(ce_m)) / (2.0 * he);
    d.dpsip_ddelta = (qq(cd_p) - qq(cd_m)) / (2.0 * hd);
    d.dpsip_dgamma = (qq(cg_p) - qq(cg_m)) / (2.0 * hg);
    return d;
  }

  const double sqrt2 = std::sqrt(2.0);
  const cplx w(gamma / (delta * sqrt2), e / (delta * sqrt2));
  const cplx z = erfcx(w);
  const double u = z.real();

  const cplx D1 = 2.0 * w * z - 2.0 / kSqrtPi;
  const cplx D2 = (4.0 * w * w + 2.0) * z - 4.0 * w / kSqrtPi;
  const cplx D3 = (8.0 * w * w * w + 12.0 * w) * z - (8.0 * w * w + 8.0) / kSqrtPi;

  const cplx we(0.0, 1.0 / (delta * sqrt2)); // dw/de
  const cplx wg(1.0 / (delta * sqrt2), 0.0); // dw/dgamma
  const cplx wd = -w / delta;                // dw/ddelta

  const double A = (D1 * we).real();   // du/de
  const double B = (D2 * we * we).real();
  const double ug = (D1 * wg).real();
  const double ud = (D1 * wd).real();
  const double Ag = (D2 * wg * we).real();
  const double Ad = (D2 * wd * we).real() - (D1 * we).real() / delta; // dwe/ddelta = -we/delta
  const double Be = (D3 * we * we * we).real();
  const double Bg = (D3 * wg * we * we).real();
  const double Bd = (D3 * wd * we * we).real() - 2.0 * (D2 * we * we).real() / delta;

  d.psi = -A / u;
  d.psi_prime = (A / u) * (A / u) - B / u;
  d.dpsi_de = d.psi_prime;
  d.dpsi_dgamma = -(Ag * u - A * ug) / (u * u);
  d.dpsi_ddelta = -(Ad * u - A * ud) / (u * u);
  auto dpsip = [&](double Bx, double Ax, double ux) {
    return 2.0 * (A / u) * (Ax * u - A * ux) / (u * u) - (Bx * u - B * ux) / (u * u);
  };
  d.dpsip_de = dpsip(Be, B, A); // note: d/de of A is B, of u is A
  d.dpsip_dgamma = dpsip(Bg, Ag, ug);
  d.dpsip_ddelta = dpsip(Bd, Ad, ud);
  // ll = -log(sqrt(2pi)) - log(delta) + log u
  d.dll_de = A / u; // = -psi
  d.dll_ddelta = ud / u - 1.0 / delta;
  d.dll_dgamma = ug / u;
  return d;
}

// ---------------------------------------------------------------------------
// Criterion with optional per-step storage; analytic gradient recursion for
// GCC / Cauchy / Gaussian, used both by the optimizer and the sandwich score.
struct CriterionEval {
  double loglik = 0.0;
  std::vector<std::array<double, 5>> step_scores; // d ll_t / d theta_j (natural)
  bool want_steps = false;
};

bool has_analytic_gradient(Family f) {
  return f == Family::GCC || f == Family::Cauchy || f == Family::Gaussian;
}

// Forward pass with derivative propagation.  Returns total loglik; fills
// grad (natural coordinates) and, when eval.want_steps, per-step scores.
double criterion_with_gradient(const std::vector<double>& y, Family f,
                               const std::vector<double>& nat,
                               std::vector<double>* grad, CriterionEval* eval) {
  const SsmParams p = vector_to_params(f, nat);
  p.validate();
  const size_t np = nat.size();
  const size_t T = y.size();
  const double sig2 = (f == Family::Cauchy) ? 0.0 : p.meas.sigma * p.meas.sigma;
  const double gamma = p.meas.gamma;

  // indices into nat: 0 mu, 1 phi, 2 tau, then family block
  const int i_sigma = (f == Family::Cauchy) ? -1 : 3;
  const int i_gamma = (f == Family::GCC) ? 4 : (f == Family::Cauchy ? 3 : -1);

  std::vector<double> dx(np, 0.0), dh(np, 0.0); // d x_pred, d h_pred
  std::vector<double> dxf(np, 0.0), dhf(np, 0.0);
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);

  double total = 0.0;
  double x_prev = 0.0, h_prev = 0.0;
  for (size_t t = 0; t < T; ++t) {
    double xp, hp;
    if (t == 0) {
      xp = p.mu;
      hp = p.stationary_var();
      if (grad) {
        std::fill(dx.begin(), dx.end(), 0.0);
        std::fill(dh.begin(), dh.end(), 0.0);
        dx[0] = 1.0;
        const double om = 1.0 - p.phi * p.phi;
        dh[1] = p.tau * p.tau * 2.0 * p.phi / (om * om);
        dh[2] = 2.0 * p.tau / om;
      }
    } else {
      xp = (1.0 - p.phi) * p.mu + p.phi * x_prev;
      hp = p.phi * p.phi * h_prev + p.tau * p.tau;
      if (grad) {
        for (size_t j = 0; j < np; ++j) {
          dx[j] = p.phi * dxf[j];
          dh[j] = p.phi * p.phi * dhf[j];
        }
        dx[0] += 1.0 - p.phi;
        dx[1] += x_prev - p.mu;
        dh[1] += 2.0 * p.phi * h_prev;
        dh[2] += 2.0 * p.tau;
      }
    }
    const double e = y[t] - xp;

    double psi, psip, ll;
    double dll_j[5] = {0, 0, 0, 0, 0};
    double dpsi_j[5] = {0, 0, 0, 0, 0};
    double dpsip_j[5] = {0, 0, 0, 0, 0};
    if (f == Family::Gaussian) {
      const double d2 = hp + sig2;
      psi = e / d2;
      psip = 1.0 / d2;
      ll = -0.5 * (std::log(2.0 * 3.14159265358979323846) + std::log(d2) + e * e / d2);
      if (grad) {
        for (size_t j = 0; j < np; ++j) {
          const double dd2 = dh[j] + (static_cast<int>(j) == i_sigma ? 2.0 * p.meas.sigma : 0.0);
          const double de = -dx[j];
          dll_j[j] = -0.5 * dd2 / d2 - e * de / d2 + 0.5 * e * e * dd2 / (d2 * d2);
          dpsi_j[j] = de / d2 - e * dd2 / (d2 * d2);
          dpsip_j[j] = -dd2 / (d2 * d2);
        }
      }
    } else if (f == Family::GCC || f == Family::Cauchy) {
      const double d2 = hp + sig2;
      const double delta = std::sqrt(d2);
      // Stable values for the filter path; closure-based partials for the
      // gradient (their accuracy needs are far looser).
      const auto core = gcv::detail::line_core(e, delta, gamma);
      psi = core.psi;
      psip = core.psi_prime;
      ll = -0.5 * std::log(2.0 * 3.14159265358979323846) - std::log(delta) + core.log_u;
      if (grad) {
        const auto vd = voigt_step_derivs(e, delta, gamma);
        for (size_t j = 0; j < np; ++j) {
          const double dd2 = dh[j] + (static_cast<int>(j) == i_sigma ? 2.0 * p.meas.sigma : 0.0);
          const double ddelta = 0.5 * dd2 / delta;
          const double de = -dx[j];
          const double dgam = (static_cast<int>(j) == i_gamma) ? 1.0 : 0.0;
          dll_j[j] = vd.dll_de * de + vd.dll_ddelta * ddelta + vd.dll_dgamma * dgam;
          dpsi_j[j] = vd.dpsi_de * de + vd.dpsi_ddelta * ddelta + vd.dpsi_dgamma * dgam;
          dpsip_j[j] = vd.dpsip_de * de + vd.dpsip_ddelta * ddelta + vd.dpsip_dgamma * dgam;
        }
      }
    } else {
      const auto ev = detail::eval_step(e, hp, p.meas);
      psi = ev.psi;
      psip = ev.psi_prime;
      ll = ev.ll;
      if (grad)
        throw std::logic_error("criterion_with_gradient: analytic gradient unavailable");
    }

    total += ll;
    if (grad) {
      for (size_t j = 0; j < np; ++j) (*grad)[j] += dll_j[j];
      if (eval && eval->want_steps) {
        std::array<double, 5> s{};
        for (size_t j = 0; j < np; ++j) s[j] = dll_j[j];
        eval->step_scores.push_back(s);
      }
      for (size_t j = 0; j < np; ++j) {
        dxf[j] = dx[j] + dh[j] * psi + hp * dpsi_j[j];
        dhf[j] = dh[j] * (1.0 - 2.0 * hp * psip) - hp * hp * dpsip_j[j];
      }
    }
    const double xf = xp + hp * psi;
    double hf = hp - hp * hp * psip;
    if (hf <= 0.0) hf = 1e-12 * hp;
    x_prev = xf;
    h_prev = hf;
  }
  if (eval) eval->loglik = total;
  return total;
}

double criterion_only(const std::vector<double>& y, Family f,
                      const std::vector<double>& nat) {
  const SsmParams p = vector_to_params(f, nat);
  return filter(y, p).loglik;
}

} // namespace

namespace detail {
double criterion_gradient(const std::vector<double>& y, Family family,
                          const SsmParams& params, std::vector<double>& grad) {
  const auto nat = params_to_vector(params);
  grad.assign(nat.size(), 0.0);
  return criterion_with_gradient(y, family, nat, &grad, nullptr);
}
} // namespace detail

QmleResult qmle(const std::vector<double>& y, Family family, const SsmBox& box,
                std::optional<SsmParams> init) {
  box.validate();
  if (y.size() < 50) throw std::invalid_argument("qmle: need at least 50 observations");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("qmle: non-finite observation");

  const auto names = param_names_for(family);
  const size_t np = names.size();

  // starting values
  SsmParams start;
  if (init) {
    start = *init;
    if (start.meas.family != family) throw std::invalid_argument("qmle: init family mismatch");
  } else {
    std::vector<double> s(y);
    std::sort(s.begin(), s.end());
    const double med = s[s.size() / 2];
    double iqr = s[static_cast<size_t>(0.75 * (s.size() - 1))] -
                 s[static_cast<size_t>(0.25 * (s.size() - 1))];
    if (!(iqr > 0.0)) iqr = 1.0;
    const double rsd = iqr / 1.349;
    double ac1 = 0.0, var = 0.0;
    for (size_t t = 0; t + 1 < y.size(); ++t) {
      ac1 += (y[t] - med) * (y[t + 1] - med);
      var += (y[t] - med) * (y[t] - med);
    }
    const double phi0 = std::clamp(var > 0 ? ac1 / var : 0.5, 0.05, 0.95);
    start.mu = med;
    start.phi = phi0;
    start.tau = std::max(0.5 * rsd * std::sqrt(1.0 - phi0 * phi0), 1e-3 * rsd);
    start.meas.family = family;
    start.meas.sigma = 0.5 * rsd;
    start.meas.gamma = 0.1 * rsd;
    start.meas.b = 0.3 * rsd;
    start.meas.nu = 8.0;
    start.meas.k = 1.345;
  }

  std::vector<double> lo_nat, hi_nat;
  natural_bounds(family, box, lo_nat, hi_nat);
  std::vector<double> nat0 = params_to_vector(start);
  for (size_t i = 0; i < np; ++i) nat0[i] = std::clamp(nat0[i], lo_nat[i], hi_nat[i]);

  // working-coordinate bounds
  std::vector<double> lo_w = to_working(lo_nat, box.phi_max);
  std::vector<double> hi_w = to_working(hi_nat, box.phi_max);
  lo_w[1] = std::atanh(std::clamp(lo_nat[1] / box.phi_max, -1.0 + 1e-9, 1.0 - 1e-9));
  hi_w[1] = std::atanh(std::clamp(hi_nat[1] / box.phi_max, -1.0 + 1e-9, 1.0 - 1e-9));
  std::vector<double> x0 = to_working(nat0, box.phi_max);
  for (size_t i = 0; i < np; ++i) x0[i] = std::clamp(x0[i], lo_w[i], hi_w[i]);

  const bool analytic = has_analytic_gradient(family);
  const double fd_step = 1e-5;

  auto eval = [&](const std::vector<double>& xw, std::vector<double>& g) {
    const std::vector<double> nat = from_working(xw, box.phi_max);
    double f;
    std::vector<double> gn(np, 0.0);
    if (analytic) {
      f = criterion_with_gradient(y, family, nat, &gn, nullptr);
    } else {
      f = criterion_only(y, family, nat);
      for (size_t j = 0; j < np; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(nat[j]));
        auto np1 = nat, nm1 = nat;
        np1[j] = std::min(nat[j] + h, hi_nat[j]);
        nm1[j] = std::max(nat[j] - h, lo_nat[j]);
        const double fp = criterion_only(y, family, np1);
        const double fm = criterion_only(y, family, nm1);
        gn[j] = (fp - fm) / (np1[j] - nm1[j]);
      }
    }
    // chain rule to working coordinates
    g.resize(np);
    g[0] = gn[0];
    const double th = std::tanh(xw[1]);
    g[1] = gn[1] * box.phi_max * (1.0 - th * th);
    for (size_t j = 2; j < np; ++j) g[j] = gn[j] * nat[j];
    return f / static_cast<double>(y.size()); // mean criterion for scaling
  };
  // wrap: gradient above is for the total; rescale consistently
  auto eval_scaled = [&](const std::vector<double>& xw, std::vector<double>& g) {
    const double f = eval(xw, g);
    for (auto& gi : g) gi /= static_cast<double>(y.size());
    return f;
  };

  const BfgsResult r = bfgs_maximize(eval_scaled, x0, lo_w, hi_w, 1e-8, 1e-10, 600);

  QmleResult out;
  out.param_names = names;
  const std::vector<double> nat_hat = from_working(r.x, box.phi_max);
  out.params_hat = vector_to_params(family, nat_hat);
  out.loglik = criterion_only(y, family, nat_hat);
  out.converged = r.converged;
  out.iterations = r.iterations;
  for (size_t i = 0; i < np; ++i) {
    if (std::abs(r.x[i] - lo_w[i]) < 1e-9 || std::abs(r.x[i] - hi_w[i]) < 1e-9)
      out.on_boundary = true;
  }
  out.converged = out.converged && !out.on_boundary;

  // Sandwich and inverse-information standard errors in natural coordinates.
  // Outer product I from per-step scores; J from central differences of the
  // total score (analytic where available, else differences of the criterion).
  const size_t T = y.size();
  std::vector<std::vector<double>> I(np, std::vector<double>(np, 0.0));
  std::vector<std::vector<double>> J(np, std::vector<double>(np, 0.0));

  auto total_score = [&](const std::vector<double>& nat) {
    std::vector<double> g(np, 0.0);
    if (analytic) {
      criterion_with_gradient(y, family, nat, &g, nullptr);
    } else {
      for (size_t j = 0; j < np; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(nat[j]));
        auto np1 = nat, nm1 = nat;
        np1[j] = std::min(nat[j] + h, hi_nat[j]);
        nm1[j] = std::max(nat[j] - h, lo_nat[j]);
        g[j] = (criterion_only(y, family, np1) - criterion_only(y, family, nm1)) /
               (np1[j] - nm1[j]);
      }
    }
    return g;
  };

  // per-step scores
  std::vector<std::array<double, 5>> steps;
  if (analytic) {
    CriterionEval ce;
    ce.want_steps = true;
    std::vector<double> g(np, 0.0);
    criterion_with_gradient(y, family, nat_hat, &g, &ce);
    steps = std::move(ce.step_scores);
  } else {
    // central differences of the per-step contributions
    steps.assign(T, {});
    for (size_t j = 0; j < np; ++j) {
      const double h = fd_step * std::max(1.0, std::abs(nat_hat[j]));
      auto np1 = nat_hat, nm1 = nat_hat;
      np1[j] = std::min(nat_hat[j] + h, hi_nat[j]);
      nm1[j] = std::max(nat_hat[j] - h, lo_nat[j]);
      const auto fp = filter(y, vector_to_params(family, np1));
      const auto fm = filter(y, vector_to_params(family, nm1));
      for (size_t t = 0; t < T; ++t)
        steps[t][j] = (fp.steps[t].ll - fm.steps[t].ll) / (np1[j] - nm1[j]);
    }
  }
  for (size_t t = 0; t < T; ++t)
    for (size_t a = 0; a < np; ++a)
      for (size_t b = 0; b < np; ++b) I[a][b] += steps[t][a] * steps[t][b];

  for (size_t j = 0; j < np; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(nat_hat[j]));
    auto np1 = nat_hat, nm1 = nat_hat;
    np1[j] = std::min(nat_hat[j] + h, hi_nat[j]);
    nm1[j] = std::max(nat_hat[j] - h, lo_nat[j]);
    const auto gp = total_score(np1);
    const auto gm = total_score(nm1);
    for (size_t a = 0; a < np; ++a)
      J[a][j] = -(gp[a] - gm[a]) / (np1[j] - nm1[j]); // -Hessian
  }
  // symmetrize J
  for (size_t a = 0; a < np; ++a)
    for (size_t b = a + 1; b < np; ++b) {
      const double m = 0.5 * (J[a][b] + J[b][a]);
      J[a][b] = J[b][a] = m;
    }

  // invert J by Gauss-Jordan
  auto invert = [np](std::vector<std::vector<double>> M) {
    std::vector<std::vector<double>> inv(np, std::vector<double>(np, 0.0));
    for (size_t i = 0; i < np; ++i) inv[i][i] = 1.0;
    for (size_t c = 0; c < np; ++c) {
      size_t piv = c;
      for (size_t rr = c + 1; rr < np; ++rr)
        if (std::abs(M[rr][c]) > std::abs(M[piv][c])) piv = rr;
      if (M[piv][c] == 0.0) throw std::runtime_error("qmle: singular Hessian");
      std::swap(M[piv], M[c]);
      std::swap(inv[piv], inv[c]);
      const double d = M[c][c];
      for (size_t cc = 0; cc < np; ++cc) {
        M[c][cc] /= d;
        inv[c][cc] /= d;
      }
      for (size_t rr = 0; rr < np; ++rr) {
        if (rr == c) continue;
        const double f = M[rr][c];
        for (size_t cc = 0; cc < np; ++cc) {
          M[rr][cc] -= f * M[c][cc];
          inv[rr][cc] -= f * inv[c][cc];
        }
      }
    }
    return inv;
  };

  out.se_sandwich.assign(np, std::numeric_limits<double>::quiet_NaN());
  out.se_invinfo.assign(np, std::numeric_limits<double>::quiet_NaN());
  try {
    const auto Jinv = invert(J);
    for (size_t a = 0; a < np; ++a)
      if (Jinv[a][a] > 0.0) out.se_invinfo[a] = std::sqrt(Jinv[a][a]);
    // sandwich J^{-1} I J^{-1}
    for (size_t a = 0; a < np; ++a) {
      double acc = 0.0;
      for (size_t i = 0; i < np; ++i)
        for (size_t j2 = 0; j2 < np; ++j2) acc += Jinv[a][i] * I[i][j2] * Jinv[j2][a];
      if (acc > 0.0) out.se_sandwich[a] = std::sqrt(acc);
    }
  } catch (const std::exception&) {
    // leave SEs as NaN; estimation result is still reported
  }
  return out;
}

QmleMcSummary qmle_mc_study(const SsmParams& true_params, std::size_t T,
                            std::size_t reps, std::uint64_t seed) {
  true_params.validate();
  if (true_params.meas.family != Family::GCC)
    throw std::invalid_argument("qmle_mc_study: GCC design expected");
  if (reps < 1) throw std::invalid_argument("qmle_mc_study: need reps >= 1");

  struct Rep {
    std::array<double, 5> v{};
    bool ok = false;
  };
  std::vector<Rep> results(reps);
  parallel_for(reps, [&](std::size_t r) {
    // per-replication stream; simulate_ssm consumes stream r via seed mixing
    Rng probe(seed, r);
    const std::uint64_t rep_seed = probe.next();
    const Simulation sim = simulate_ssm(true_params, T, rep_seed);
    SsmBox box = default_ssm_box(sim.y);
    try {
      const QmleResult q = qmle(sim.y, Family::GCC, box, std::nullopt);
      if (q.converged) {
        results[r].v = {q.params_hat.meas.sigma, q.params_hat.meas.gamma, q.params_hat.mu,
                        q.params_hat.phi, q.params_hat.tau};
        results[r].ok = true;
      }
    } catch (const std::exception&) {
    }
  });

  QmleMcSummary s;
  for (const auto& r : results) {
    if (!r.ok) continue;
    ++s.reps_used;
    for (int j = 0; j < 5; ++j) s.mean[j] += r.v[j];
  }
  s.reps_failed = reps - s.reps_used;
  if (s.reps_used < 2)
    throw std::runtime_error("qmle_mc_study: fewer than 2 converged replications");
  for (int j = 0; j < 5; ++j) s.mean[j] /= static_cast<double>(s.reps_used);
  for (const auto& r : results) {
    if (!r.ok) continue;
    for (int j = 0; j < 5; ++j) {
      const double d = r.v[j] - s.mean[j];
      s.std_dev[j] += d * d;
    }
  }
  for (int j = 0; j < 5; ++j)
    s.std_dev[j] = std::sqrt(s.std_dev[j] / static_cast<double>(s.reps_used - 1));
  return s;
}

} // namespace ssm
} // namespace gcv
