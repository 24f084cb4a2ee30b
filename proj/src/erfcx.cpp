#include "gcv/erfcx.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gcv {

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955125739;
constexpr double kPi = 3.14159265358979323846;

using cplx = std::complex<double>;

// exp(z) without overflow in intermediates: caller guarantees Re(z) is
// representable after the final scaling (we only ever call it with
// Re(z) < ~700 or deliberately tiny results).
inline cplx cexp(const cplx& z) {
  double m = std::exp(z.real());
  return {m * std::cos(z.imag()), m * std::sin(z.imag())};
}

} // namespace

namespace detail {

// Maclaurin region, |w| <= 1:  erfcx = exp(w^2) (1 - erf(w)).
// erf loses at most ~1 digit to cancellation at |w| = 1 on the real axis.
std::complex<double> erfcx_series_small(cplx w) {
  const cplx w2 = w * w;
  cplx term = w;      // w^(2n+1) / (n! (2n+1)) * (2n+1) ... built iteratively
  cplx erf_sum = w;
  // erf(w) = 2/sqrt(pi) * sum_{n>=0} (-1)^n w^(2n+1) / (n! (2n+1))
  cplx pow = w;
  double fact = 1.0;
  for (int n = 1; n < 40; ++n) {
    pow *= -w2;
    fact *= n;
    term = pow / (fact * (2.0 * n + 1.0));
    erf_sum += term;
    if (std::abs(term) < 1e-18 * std::abs(erf_sum)) break;
  }
  const cplx erf_w = kTwoOverSqrtPi * erf_sum;
  return cexp(w2) * (1.0 - erf_w);
}

// Large-|w| region: asymptotic inverse-power series
//   erfcx(w) ~ 1/(sqrt(pi) w) * sum_k (-1)^k (2k-1)!! / (2 w^2)^k.
// Evaluated with complex powers of 1/w so each component keeps its own
// relative accuracy (the component parities never mix orders).
std::complex<double> erfcx_series_large(cplx w) {
  const cplx inv_w2 = 1.0 / (w * w);
  cplx term{1.0, 0.0};
  cplx sum{1.0, 0.0};
  for (int k = 1; k <= 40; ++k) {
    term *= -(2.0 * k - 1.0) * 0.5 * inv_w2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (w * std::sqrt(kPi));
}

// Mid region: pole-corrected trapezoidal/midpoint expansion of the Faddeeva
// integral, evaluated at zeta = i w (upper half-plane).  The node sum is the
// quadrature of (i/pi) integral exp(-t^2)/(zeta - t) dt and the residue
// correction 2 exp(-zeta^2) / (1 -+ exp(-2 pi i zeta / h)) restores the pole
// contribution exactly; the remaining error is O(exp(-(pi/h)^2)).
// The rule (node lattice offset) is chosen so Re(zeta) stays at least h/4
// away from the correction-term poles, and h adapts so the quadrature floor
// sits below the smallest attainable component.
std::complex<double> erfcx_trapezoid(cplx w) {
  const double a = w.real();        // >= 0
  const double b = w.imag();        // >= 0 here (conjugation handled upstream)
  const double x = -b;              // zeta = x + i a
  const cplx zeta{x, a};

  // Smallest magnitude the real component can take: the larger of the
  // power-series part a/(sqrt(pi)|w|^2) and the exponential part
  // exp(a^2 - b^2).  h must push the quadrature floor below it.
  double neglog_floor = 0.0;
  const double mod2 = a * a + b * b;
  if (a > 0.0) {
    const double upow = a / (std::sqrt(kPi) * mod2);
    neglog_floor = -std::log(upow);
    if (b > a) neglog_floor = std::min(neglog_floor, b * b - a * a);
    if (neglog_floor < 0.0) neglog_floor = 0.0;
  } else {
    neglog_floor = std::max(0.0, b * b - a * a);
  }

  double h = std::min(0.45, kPi / std::sqrt(neglog_floor + 38.0));
  // Keep the correction term's exponent a^2 - b^2 - 2 pi a / h negative.
  if (a > b) {
    h = std::min(h, 2.0 * kPi * a / (a * a - b * b + 40.0));
  }

  // Rule choice: trapezoid has poles at integer lattice n h, midpoint at
  // (n + 1/2) h; pick whichever keeps x at distance >= h/4.
  const double frac = x / h - std::round(x / h);
  const bool use_trapezoid = std::abs(frac) >= 0.25;

  const double t_max = kPi / h + h;
  const cplx zeta2 = zeta * zeta;

  // Node sum with symmetric pairing 1/(zeta-t) + 1/(zeta+t) = 2 zeta/(zeta^2-t^2),
  // which preserves the odd/even component grading near the axes.
  cplx sum{0.0, 0.0};
  if (use_trapezoid) {
    sum = 1.0 / zeta;
    for (int n = 1; n * h <= t_max; ++n) {
      const double t = n * h;
      sum += std::exp(-t * t) * 2.0 * zeta / (zeta2 - t * t);
    }
  } else {
    for (int n = 0; (n + 0.5) * h <= t_max; ++n) {
      const double t = (n + 0.5) * h;
      sum += std::exp(-t * t) * 2.0 * zeta / (zeta2 - t * t);
    }
  }
  cplx value = cplx{0.0, h / kPi} * sum;

  // Residue correction, exponent-shifted when exp(-2 pi i zeta / h) would
  // overflow.  sign: trapezoid -> 1 - q, midpoint -> 1 + q, q = exp(-2pi i zeta/h).
  const cplx e1 = -zeta2;                       // Re = a^2 - b^2
  const cplx e2 = cplx{0.0, -2.0 * kPi / h} * zeta; // Re = 2 pi a / h >= 0
  const double sgn = use_trapezoid ? -1.0 : 1.0;
  cplx corr;
  if (e2.real() > 300.0) {
    // 1/(1 +- e^{e2}) = e^{-e2} / (e^{-e2} +- 1)
    const cplx em = cexp(-e2);
    corr = 2.0 * cexp(e1 - e2) / (em + sgn);
  } else {
    corr = 2.0 * cexp(e1) / (1.0 + sgn * cexp(e2));
  }
  value += corr;
  return value;
}

} // namespace detail

std::complex<double> erfcx(std::complex<double> w) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    throw std::domain_error("erfcx: non-finite argument");
  if (w.real() < 0.0)
    throw std::domain_error("erfcx: argument in left half-plane");

  const bool conj_flip = w.imag() < 0.0;
  if (conj_flip) w = std::conj(w);

  const double a = w.real();
  const double b = w.imag();
  cplx z;
  if (a == 0.0 && b == 0.0) {
    z = {1.0, 0.0};
  } else if (a * a + b * b <= 1.0) {
    z = detail::erfcx_series_small(w);
  } else if (a * a + b * b >= 756.25) { // |w| >= 27.5
    z = detail::erfcx_series_large(w);
  } else {
    z = detail::erfcx_trapezoid(w);
  }

  if (b == 0.0) z = {z.real(), 0.0};               // real axis: exactly real
  if (a == 0.0) z = {std::exp(-b * b), z.imag()};  // imaginary axis: Re exact

  return conj_flip ? std::conj(z) : z;
}

double erfcx_real(double x) {
  if (!(x >= 0.0)) throw std::domain_error("erfcx_real: need x >= 0");
  return erfcx(std::complex<double>(x, 0.0)).real();
}

std::complex<double> erfcx_derivative(std::complex<double> w, int order) {
  if (order < 1 || order > 6)
    throw std::invalid_argument("erfcx_derivative: order must be in [1,6]");
  // p_n, q_n coefficient arrays (real coefficients, degree <= n).
  std::vector<double> p{1.0}, q{0.0};
  for (int n = 0; n < order; ++n) {
    std::vector<double> pn(p.size() + 1, 0.0), qn(p.size(), 0.0);
    for (size_t j = 1; j < p.size(); ++j) pn[j - 1] += j * p[j]; // p'
    for (size_t j = 0; j < p.size(); ++j) pn[j + 1] += 2.0 * p[j]; // + 2w p
    for (size_t j = 1; j < q.size(); ++j) qn[j - 1] += j * q[j]; // q'
    for (size_t j = 0; j < p.size(); ++j) qn[j] -= kTwoOverSqrtPi * p[j];
    p = std::move(pn);
    q = std::move(qn);
  }
  const cplx e = erfcx(w);
  auto horner = [&](const std::vector<double>& c) {
    cplx acc{0.0, 0.0};
    for (size_t j = c.size(); j-- > 0;) acc = acc * w + c[j];
    return acc;
  };
  return horner(p) * e + horner(q);
}

} // namespace gcv
