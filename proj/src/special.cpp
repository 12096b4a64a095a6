#include "tiltgrid/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>

namespace tiltgrid::special {

namespace {

constexpr double kPi = std::numbers::pi;

// \int_0^1 s^k e^{ts} ds by its Taylor series; fine for |t| < 0.5.
cplx moment_series(cplx t, int k) {
    cplx sum = 0.0;
    cplx term = 1.0; // t^j / j!
    for (int j = 0; j < 30; ++j) {
        sum += term / static_cast<double>(j + k + 1);
        term *= t / static_cast<double>(j + 1);
        if (std::abs(term) < 1e-19) break;
    }
    return sum;
}

cplx exprel3(cplx t) {
    if (std::abs(t) < 0.5) return moment_series(t, 2);
    return (std::exp(t) * (t * t - 2.0 * t + 2.0) - 2.0) / (t * t * t);
}

// B_{2m} / (2m (2m+1)!) for the dilogarithm expansion.
const std::array<double, 40>& dilog_coefficients() {
    static const std::array<double, 40> coeffs = [] {
        std::array<double, 40> c{};
        for (int m = 1; m <= 40; ++m) {
            const double b = boost::math::bernoulli_b2n<double>(m);
            const double f = boost::math::factorial<double>(static_cast<unsigned>(2 * m + 1));
            c[m - 1] = b / (2.0 * m * f);
        }
        return c;
    }();
    return coeffs;
}

} // namespace

cplx exprel1(cplx t) {
    if (std::abs(t) < 0.5) return moment_series(t, 0);
    return (std::exp(t) - 1.0) / t;
}

cplx exprel2(cplx t) {
    if (std::abs(t) < 0.5) return moment_series(t, 1);
    return (std::exp(t) * (t - 1.0) + 1.0) / (t * t);
}

cplx dilog_partial(cplx q, long n) {
    cplx sum = 0.0;
    cplx qk = 1.0;
    for (long k = 1; k <= n; ++k) {
        qk *= q;
        sum += qk / (static_cast<double>(k) * static_cast<double>(k));
    }
    return sum;
}

cplx dilog_exp(cplx mu) {
    mu = {mu.real(), std::remainder(mu.imag(), 2.0 * kPi)};
    if (mu.real() < -std::log(4.0)) {
        const cplx q = std::exp(mu);
        cplx sum = 0.0;
        cplx qk = 1.0;
        for (int k = 1; k < 200; ++k) {
            qk *= q;
            sum += qk / static_cast<double>(k * k);
            if (std::abs(qk) < 1e-18) break;
        }
        return sum;
    }
    const double zeta2 = kPi * kPi / 6.0;
    if (std::abs(mu) == 0.0) return zeta2;
    cplx result = zeta2 + mu * (1.0 - std::log(-mu)) - mu * mu / 4.0;
    const cplx mu2 = mu * mu;
    cplx power = mu * mu2; // mu^{2m+1}
    for (const double c : dilog_coefficients()) {
        const cplx term = c * power;
        result -= term;
        if (std::abs(term) < 1e-18 * std::abs(result)) break;
        power *= mu2;
    }
    return result;
}

QuadResult laplace_power(cplx w, double alpha, double x0) {
    QuadResult out;
    if (w == cplx(0.0)) {
        out.value = std::pow(x0, 1.0 - alpha) / (alpha - 1.0);
        return out;
    }
    const double absw = std::abs(w);
    constexpr double kRatio = 0.01;   // cell width relative to x0 + v
    constexpr double kAsymptotic = 60.0;
    constexpr int kTerms = 10;
    constexpr double kYCap = 1e10;

    double y_end = std::max(x0, kAsymptotic / absw);
    const bool asymptotic_close = y_end <= kYCap;
    y_end = std::min(y_end, kYCap);

    auto f = [alpha](double y) { return std::pow(y, -alpha); };
    const double d3 = alpha * (alpha + 1.0) * (alpha + 2.0);

    cplx acc = 0.0;
    double err = 0.0;
    double y = x0;
    bool decayed = false;
    while (y < y_end) {
        const double h = std::min(kRatio * y, y_end - y);
        const double v = y - x0;
        const double damp = std::exp(w.real() * v);
        if (w.real() < 0.0 && damp * f(y) / (-w.real()) < 1e-18 * std::max(std::abs(acc), 1e-300)) {
            err += damp * f(y) / (-w.real());
            decayed = true;
            break;
        }
        const double f0 = f(y);
        const double fm = f(y + 0.5 * h);
        const double f1 = f(y + h);
        const cplx t = w * h;
        const cplx c1 = -3.0 * f0 + 4.0 * fm - f1;
        const cplx c2 = 2.0 * f0 - 4.0 * fm + 2.0 * f1;
        acc += std::exp(w * v) * h * (f0 * exprel1(t) + c1 * exprel2(t) + c2 * exprel3(t));
        // quadratic interpolation error |f'''| h^3 / (9 sqrt 3) over a cell of width h
        err += damp * h * d3 * std::pow(y, -alpha - 3.0) * h * h * h / (9.0 * std::sqrt(3.0));
        y += h;
    }
    if (!decayed) {
        const double v = y - x0;
        if (asymptotic_close) {
            cplx tail = 0.0;
            double rising = 1.0; // (alpha)_k
            cplx wpow = w;       // w^{k+1}
            for (int k = 0; k < kTerms; ++k) {
                tail += rising * std::pow(y, -alpha - k) / wpow;
                rising *= alpha + k;
                wpow *= w;
            }
            acc += -std::exp(w * v) * tail;
            err += rising * std::pow(y, 1.0 - alpha - kTerms) / ((alpha + kTerms - 1.0) * std::pow(absw, kTerms));
        } else {
            const double rem = std::pow(y, 1.0 - alpha) / (alpha - 1.0);
            acc += std::exp(w * v) * rem;
            err += 2.0 * rem;
        }
    }
    out.value = acc;
    out.error_bound = err + 1e-15 * std::abs(acc);
    return out;
}

} // namespace tiltgrid::special
