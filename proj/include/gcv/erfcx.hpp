#pragma once

#include <complex>

namespace gcv {

// Scaled complementary error function erfcx(w) = exp(w^2) erfc(w) for
// Re(w) >= 0.  Both components carry relative accuracy (the real part stays
// accurate even where it is exponentially smaller than the imaginary part,
// which is what keeps Voigt log-density tails finite).
//
// Throws std::domain_error for Re(w) < 0 or non-finite input.
std::complex<double> erfcx(std::complex<double> w);

// n-th derivative of erfcx at w, 1 <= n <= 6, via the closure recursion
// e^(n)(w) = p_n(w) e(w) + q_n(w) with
//   p_{n+1} = p_n' + 2w p_n,   q_{n+1} = q_n' - (2/sqrt(pi)) p_n,
// starting from p_0 = 1, q_0 = 0.
std::complex<double> erfcx_derivative(std::complex<double> w, int order);

// erfcx restricted to the real axis, x >= 0.
double erfcx_real(double x);

namespace detail {

// Individual evaluation regions, exposed for accuracy tests.
std::complex<double> erfcx_series_small(std::complex<double> w);
std::complex<double> erfcx_series_large(std::complex<double> w);
std::complex<double> erfcx_trapezoid(std::complex<double> w);

} // namespace detail

} // namespace gcv
