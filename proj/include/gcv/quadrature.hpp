#pragma once

#include <functional>
#include <vector>

namespace gcv {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule);

// Composite Gauss-Legendre with panel doubling until two successive
// refinements differ by less than tol * (1 + |I|); throws on non-convergence.
double gl_adaptive(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-9, int points_per_panel = 251,
                   int initial_panels = 8, int max_doublings = 6);

// Cauchy-tail substitution y = center + scale * tan(pi u), u in (-1/2, 1/2),
// mapping integrals over the whole real line with polynomial-decay tails onto
// a finite interval.  Integrates g(y) dy.
double tan_integrate(const std::function<double(double)>& g, double center,
                     double scale, double tol = 1e-9);

// Simple adaptive Simpson on [a, b] (used by test-style oracles and the
// conditional-density integrals, which have exponential tails).
double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int max_depth = 30);

} // namespace gcv
