#pragma once

#include <functional>
#include <vector>

namespace gcv {

// Golden-section minimization of f on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-10, int max_iter = 200);

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double step = 0.1,
                             double ftol = 1e-12, double xtol = 1e-9,
                             int max_iter = 4000);

// Quasi-Newton (BFGS) maximization with box clamping in the working
// coordinates.  `eval` returns the objective and fills the gradient.
// Convergence at ||g||_inf <= gtol * (1 + |f|) or step <= steptol.
struct BfgsResult {
  std::vector<double> x;
  double fval = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

BfgsResult bfgs_maximize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& eval,
    std::vector<double> x0, const std::vector<double>& lower,
    const std::vector<double>& upper, double gtol = 1e-8, double steptol = 1e-10,
    int max_iter = 500);

} // namespace gcv
