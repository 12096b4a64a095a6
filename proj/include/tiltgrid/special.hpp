#pragma once

// Special functions and oscillatory quadrature shared by the transform code.

#include <complex>

namespace tiltgrid::special {

using cplx = std::complex<double>;

/// (e^t - 1)/t, stable near t = 0.
cplx exprel1(cplx t);

/// \int_0^1 s e^{ts} ds = (e^t (t-1) + 1)/t^2, stable near t = 0.
cplx exprel2(cplx t);

/// Dilogarithm Li_2(q) for |q| <= 1, q given as q = e^{mu} with Re mu <= 0.
/// Uses the power series for small |q| and the Bernoulli expansion in mu
/// otherwise, which also covers the unit circle (Clausen function).
cplx dilog_exp(cplx mu);

/// Direct partial sum \sum_{k=1}^{n} q^k / k^2.
cplx dilog_partial(cplx q, long n);

struct QuadResult {
    cplx value;
    double error_bound = 0.0;
};

/// \int_0^\infty e^{w v} (x0 + v)^{-alpha} dv for Re w <= 0, alpha > 1, x0 >= 1.
/// Filon (piecewise-linear amplitude, exact exponential) on geometric cells,
/// closed by an asymptotic integration-by-parts tail.
QuadResult laplace_power(cplx w, double alpha, double x0 = 1.0);

} // namespace tiltgrid::special
