#include "gcv/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace gcv {

GaussLegendre::GaussLegendre(int n) {
  if (n < 2) throw std::invalid_argument("GaussLegendre: need n >= 2");
  nodes.resize(n);
  weights.resize(n);
  const double pi = 3.14159265358979323846;
  // Newton iteration from the Tricomi initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence: p_k(x)
      double p0 = 1.0;
      p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polishing pass for the weight
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        const double dpf = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpf * dpf);
        break;
      }
    }
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

double gl_adaptive(const std::function<double(double)>& f, double a, double b,
                   double tol, int points_per_panel, int initial_panels,
                   int max_doublings) {
  static thread_local int cached_n = 0;
  static thread_local GaussLegendre* cached = nullptr;
  if (cached_n != points_per_panel) {
    delete cached;
    cached = new GaussLegendre(points_per_panel);
    cached_n = points_per_panel;
  }
  const GaussLegendre& rule = *cached;

  auto pass = [&](int panels) {
    double acc = 0.0;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
      acc += gl_integrate(f, a + p * w, a + (p + 1) * w, rule);
    return acc;
  };

  int panels = initial_panels;
  double prev = pass(panels);
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    const double cur = pass(panels);
    if (std::abs(cur - prev) < tol * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  throw std::runtime_error("gl_adaptive: quadrature did not converge");
}

double tan_integrate(const std::function<double(double)>& g, double center,
                     double scale, double tol) {
  const double pi = 3.14159265358979323846;
  auto integrand = [&](double u) {
    const double c = std::cos(pi * u);
    const double y = center + scale * std::tan(pi * u);
    const double jac = scale * pi / (c * c);
    return g(y) * jac;
  };
  return gl_adaptive(integrand, -0.5, 0.5, tol);
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace gcv
