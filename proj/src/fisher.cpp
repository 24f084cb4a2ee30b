#include <array>
#include <cmath>
#include <stdexcept>

#include "gcv/quadrature.hpp"
#include "gcv/voigt.hpp"

namespace gcv {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 invert3(const Mat3& m) {
  Mat3 inv{};
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], i = m[2][2];
  const double A = e * i - f * h, B = -(d * i - f * g), C = d * h - e * g;
  const double det = a * A + b * B + c * C;
  if (det == 0.0 || !std::isfinite(det))
    throw std::runtime_error("fisher_information: singular information matrix");
  inv[0][0] = A / det;
  inv[0][1] = -(b * i - c * h) / det;
  inv[0][2] = (b * f - c * e) / det;
  inv[1][0] = B / det;
  inv[1][1] = (a * i - c * g) / det;
  inv[1][2] = -(a * f - c * d) / det;
  inv[2][0] = C / det;
  inv[2][1] = -(a * h - b * g) / det;
  inv[2][2] = (a * e - b * d) / det;
  return inv;
}

} // namespace

FisherInfo fisher_information(const VoigtParams& params) {
  params.validate();
  const double pi = 3.14159265358979323846;

  // Both moment matrices in one pass over the tan-substituted grid:
  // y = mu + s0 tan(pi t) maps the Cauchy-tailed integrands onto (-1/2, 1/2).
  // The substitution scale s0 = sigma + gamma keeps the node density matched
  // to the bulk when the two scales are far apart.
  const double s0 = params.sigma + params.gamma;
  auto accumulate = [&](int panels, Mat3& ss, Mat3& nh) {
    static thread_local GaussLegendre rule(251);
    ss = Mat3{};
    nh = Mat3{};
    const double w = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = -0.5 + p * w, b = a + w;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = mid + half * rule.nodes[k];
        const double cs = std::cos(pi * t);
        const double y = params.mu + s0 * std::tan(pi * t);
        const double jac = s0 * pi / (cs * cs);
        const double f = pdf(y, params);
        const double wt = rule.weights[k] * half * f * jac;
        const ScoreVector s = score(y, params);
        const HessianMatrix H = hessian(y, params);
        const double sv[3] = {s.s_mu, s.s_sigma, s.s_gamma};
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            ss[i][j] += wt * sv[i] * sv[j];
            nh[i][j] -= wt * H(i, j);
          }
      }
    }
  };

  Mat3 ss_prev, nh_prev;
  accumulate(8, ss_prev, nh_prev);
  FisherInfo out;
  bool done = false;
  for (int panels = 16; panels <= 256; panels *= 2) {
    Mat3 ss_cur, nh_cur;
    accumulate(panels, ss_cur, nh_cur);
    double gap = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        gap = std::max(gap, std::abs(ss_cur[i][j] - ss_prev[i][j]));
    ss_prev = ss_cur;
    nh_prev = nh_cur;
    if (gap < 1e-9) {
      done = true;
      break;
    }
  }
  if (!done) throw std::runtime_error("fisher_information: quadrature did not converge");

  out.info = ss_prev;
  out.neg_mean_hessian = nh_prev;
  out.inverse = invert3(ss_prev);
  for (int i = 0; i < 3; ++i) {
    if (out.inverse[i][i] <= 0.0)
      throw std::runtime_error("fisher_information: information matrix not positive definite");
    out.astd[i] = std::sqrt(out.inverse[i][i]);
  }
  double gap = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      gap = std::max(gap, std::abs(out.info[i][j] - out.neg_mean_hessian[i][j]));
  out.equality_gap = gap;
  return out;
}

double precision_ratio(double lambda) {
  if (!(lambda >= 1e-3 && lambda <= 1e2))
    throw std::invalid_argument("precision_ratio: lambda outside [1e-3, 1e2]");
  const FisherInfo fi = fisher_information({0.0, 1.0, lambda});
  return fi.astd[1] / fi.astd[2];
}

} // namespace gcv
