#include <cmath>
#include <stdexcept>

#include "gcv/optim.hpp"
#include "gcv/quadrature.hpp"
#include "gcv/voigt.hpp"

namespace gcv {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_student_t(double y, double scale, double dof) {
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * kPi) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(y * y / (dof * scale * scale));
}

double log_pseudo_voigt(double y, double eta, double sp, double gp) {
  const double gauss = std::exp(-0.5 * y * y / (sp * sp)) / (sp * std::sqrt(2.0 * kPi));
  const double cauchy = gp / (kPi * (y * y + gp * gp));
  return std::log((1.0 - eta) * gauss + eta * cauchy);
}

} // namespace

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol, int max_iter) {
  const double invphi = 0.61803398874989484820;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step, double ftol,
                             double xtol, int max_iter) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step * (x0[i] != 0.0 ? std::abs(x0[i]) : 1.0);
  for (size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // order
    for (size_t i = 0; i <= n; ++i)
      for (size_t j = i + 1; j <= n; ++j)
        if (fv[j] < fv[i]) {
          std::swap(fv[i], fv[j]);
          std::swap(simplex[i], simplex[j]);
        }
    double xspread = 0.0;
    for (size_t i = 0; i < n; ++i)
      xspread = std::max(xspread, std::abs(simplex[n][i] - simplex[0][i]));
    if (std::abs(fv[n] - fv[0]) < ftol * (1.0 + std::abs(fv[0])) && xspread < xtol) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (auto& c : centroid) c /= n;

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (size_t j = 0; j < n; ++j)
        x[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
      return x;
    };
    const auto xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const auto xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      const auto xc = blend(fr < fv[n] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else { // shrink
        for (size_t i = 1; i <= n; ++i) {
          for (size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  res.x = simplex[0];
  res.fval = fv[0];
  res.iterations = iter;
  return res;
}

BfgsResult bfgs_maximize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& eval,
    std::vector<double> x0, const std::vector<double>& lower,
    const std::vector<double>& upper, double gtol, double steptol, int max_iter) {
  const size_t n = x0.size();
  auto clamp = [&](std::vector<double>& x) {
    for (size_t i = 0; i < n; ++i) x[i] = std::min(upper[i], std::max(lower[i], x[i]));
  };
  clamp(x0);

  std::vector<std::vector<double>> Hinv(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) Hinv[i][i] = 1.0;

  std::vector<double> g(n), x = x0;
  double fx = eval(x, g);

  BfgsResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double gnorm = 0.0;
    for (double gi : g) gnorm = std::max(gnorm, std::abs(gi));
    if (gnorm <= gtol * (1.0 + std::abs(fx))) {
      res.converged = true;
      break;
    }
    // ascent direction d = Hinv * g
    std::vector<double> d(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) d[i] += Hinv[i][j] * g[j];

    // backtracking line search with box clamping at the trial point
    double alpha = 1.0;
    std::vector<double> xn(n), gn(n);
    double fn = fx;
    bool accepted = false;
    double dir_deriv = 0.0;
    for (size_t i = 0; i < n; ++i) dir_deriv += d[i] * g[i];
    if (dir_deriv <= 0.0) { // reset to steepest ascent
      d = g;
      dir_deriv = 0.0;
      for (size_t i = 0; i < n; ++i) dir_deriv += g[i] * g[i];
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) Hinv[i][j] = (i == j) ? 1.0 : 0.0;
    }
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t i = 0; i < n; ++i) xn[i] = x[i] + alpha * d[i];
      clamp(xn);
      double max_step = 0.0;
      for (size_t i = 0; i < n; ++i) max_step = std::max(max_step, std::abs(xn[i] - x[i]));
      if (max_step <= steptol) break;
      fn = eval(xn, gn);
      // accept only non-decreasing steps so the objective sequence ascends
      if (std::isfinite(fn) && fn >= fx) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      double max_step = 0.0;
      for (size_t i = 0; i < n; ++i) max_step = std::max(max_step, std::abs(xn[i] - x[i]));
      res.converged = max_step <= steptol; // stalled at resolution limit
      break;
    }

    // BFGS update on s = xn - x, yv = -(gn - g)  (maximization)
    std::vector<double> s(n), yv(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      yv[i] = g[i] - gn[i];
    }
    double sy = 0.0;
    for (size_t i = 0; i < n; ++i) sy += s[i] * yv[i];
    if (sy > 1e-12) {
      std::vector<double> Hy(n, 0.0);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) Hy[i] += Hinv[i][j] * yv[j];
      double yHy = 0.0;
      for (size_t i = 0; i < n; ++i) yHy += yv[i] * Hy[i];
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          Hinv[i][j] += ((sy + yHy) * s[i] * s[j]) / (sy * sy) -
                        (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
    }
    x = xn;
    g = gn;
    fx = fn;
  }
  res.x = x;
  res.fval = fx;
  res.iterations = iter;
  double gnorm = 0.0;
  for (double gi : g) gnorm = std::max(gnorm, std::abs(gi));
  res.grad_norm = gnorm;
  if (!res.converged) res.converged = gnorm <= gtol * (1.0 + std::abs(fx));
  return res;
}

BestApproximations best_approximations(const VoigtParams& params) {
  params.validate();

  // KL(V(params) || g) on the tan-substituted grid; the V-side entropy term
  // is constant but kept so the reported KL is the true discrepancy.
  static thread_local GaussLegendre rule(101);
  const int panels = 24;
  std::vector<double> ys, wt, logf;
  ys.reserve(panels * rule.nodes.size());
  const double w = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = -0.5 + p * w;
    const double mid = a + 0.5 * w, half = 0.5 * w;
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = mid + half * rule.nodes[k];
      const double cs = std::cos(kPi * t);
      const double y = params.mu + (params.sigma + params.gamma) * std::tan(kPi * t);
      const double jac = (params.sigma + params.gamma) * kPi / (cs * cs);
      const double f = pdf(y, params);
      ys.push_back(y - params.mu); // candidates share the location
      wt.push_back(rule.weights[k] * half * f * jac);
      logf.push_back(log_pdf(y, params));
    }
  }
  auto kl = [&](const std::function<double(double)>& logg) {
    double acc = 0.0;
    for (size_t i = 0; i < ys.size(); ++i) acc += wt[i] * (logf[i] - logg(ys[i]));
    return acc;
  };

  BestApproximations out;

  { // Student-t in log coordinates (scale, dof both positive)
    auto obj = [&](const std::vector<double>& p) {
      return kl([&](double y) { return log_student_t(y, std::exp(p[0]), std::exp(p[1])); });
    };
    std::vector<double> p{std::log(params.sigma + params.gamma), std::log(2.0)};
    // coordinate-wise golden-section pass, then Nelder-Mead polish
    for (int sweep = 0; sweep < 3; ++sweep)
      for (size_t i = 0; i < p.size(); ++i) {
        auto f1 = [&](double t) {
          auto q = p;
          q[i] = t;
          return obj(q);
        };
        p[i] = golden_section(f1, p[i] - 1.5, p[i] + 1.5, 1e-10);
      }
    const auto r = nelder_mead(obj, p, 0.05, 1e-13, 1e-8);
    if (!r.converged) throw std::runtime_error("best_approximations: Student-t fit did not converge");
    out.student_t = {std::exp(r.x[0]), std::exp(r.x[1])};
    out.kl_student_t = r.fval;
  }

  { // pseudo-Voigt: eta in (0,1) via logistic, scales in logs
    auto obj = [&](const std::vector<double>& p) {
      const double eta = 1.0 / (1.0 + std::exp(-p[0]));
      return kl([&](double y) {
        return log_pseudo_voigt(y, eta, std::exp(p[1]), std::exp(p[2]));
      });
    };
    std::vector<double> p{0.0, std::log(params.sigma * 1.5), std::log(params.gamma * 1.5)};
    for (int sweep = 0; sweep < 3; ++sweep)
      for (size_t i = 0; i < p.size(); ++i) {
        auto f1 = [&](double t) {
          auto q = p;
          q[i] = t;
          return obj(q);
        };
        p[i] = golden_section(f1, p[i] - 1.5, p[i] + 1.5, 1e-10);
      }
    const auto r = nelder_mead(obj, p, 0.05, 1e-13, 1e-8);
    if (!r.converged) throw std::runtime_error("best_approximations: pseudo-Voigt fit did not converge");
    out.pseudo_voigt = {1.0 / (1.0 + std::exp(-r.x[0])), std::exp(r.x[1]), std::exp(r.x[2])};
    out.kl_pseudo_voigt = r.fval;
  }
  return out;
}

} // namespace gcv
