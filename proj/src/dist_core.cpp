#include "tiltgrid/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tiltgrid/error.hpp"
#include "tiltgrid/special.hpp"

namespace tiltgrid {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// \int_a^b e^{v u} du
cplx segment(cplx v, double a, double b) {
    if (b <= a) return 0.0;
    return std::exp(v * a) * (b - a) * special::exprel1(v * (b - a));
}

// \int_a^b e^{w u} (3pi + 1 + sin u - cos u) du
cplx xi_segment(cplx w, double a, double b) {
    const cplx i(0.0, 1.0);
    const cplx c_plus = -0.5 * (1.0 + i);
    const cplx c_minus = 0.5 * (-1.0 + i);
    return xi::kLevel * segment(w, a, b) + c_plus * segment(w + i, a, b) + c_minus * segment(w - i, a, b);
}

double xi_level(long n) {
    if (n < 1) return 1.0 / (3.0 * kPi);
    const double nn = static_cast<double>(n);
    return 1.0 / (kPi * kPi * kPi * nn * nn);
}

LaplaceTail xi_tail_laplace(cplx s, double from) {
    const cplx w = s - 1.0;
    LaplaceTail out;
    cplx acc = 0.0;
    if (from < 0.0) {
        acc += segment(s, from, 0.0);
        from = 0.0;
    }
    const double period = 2.0 * kPi;
    const long n0 = static_cast<long>(std::floor(from / period));
    const double period_end = period * static_cast<double>(n0 + 1);
    acc += xi_level(n0) * xi_segment(w, from, period_end);

    // Whole periods n > n0 contribute level(n) e^{2 pi n w} I0(w).
    const cplx i0 = xi_segment(w, 0.0, period);
    const cplx mu = period * w;
    const cplx q = std::exp(mu);
    const cplx li2 = special::dilog_exp(mu);
    const long first = std::max<long>(n0, 0);
    const cplx series_tail = li2 - special::dilog_partial(q, first);
    acc += i0 * series_tail / (kPi * kPi * kPi);

    out.value = acc;
    out.error_bound = 1e-14 * (std::abs(acc) + std::abs(i0) * std::abs(li2)) * (1.0 + std::log1p(static_cast<double>(first)));
    return out;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

std::string to_string(Family f) {
    switch (f) {
    case Family::point_mass: return "point_mass";
    case Family::exponential: return "exponential";
    case Family::exp_pareto: return "exp_pareto";
    case Family::xi_counterexample: return "xi";
    case Family::m_mixture: return "m_mixture";
    case Family::derived: return "derived";
    }
    return "unknown";
}

namespace xi {

double phi2(double x) {
    if (x < 0.0) return 0.0;
    return xi_level(static_cast<long>(std::floor(x / (2.0 * kPi))));
}

double phi1_tilted(double x) { return kLevel + std::sqrt(2.0) * std::sin(x - kPi / 4.0); }

double phi1(double x) {
    if (x < 0.0) return 0.0;
    return std::exp(-x) * phi1_tilted(x);
}

} // namespace xi

TailSpec::TailSpec(Variant v) : v_(std::move(v)) {}

Family TailSpec::family() const {
    return std::visit(overloaded{
                          [](const family::PointMass&) { return Family::point_mass; },
                          [](const family::Exponential&) { return Family::exponential; },
                          [](const family::ExpPareto&) { return Family::exp_pareto; },
                          [](const family::Xi&) { return Family::xi_counterexample; },
                          [](const family::MMixture&) { return Family::m_mixture; },
                          [](const family::ScaledCap&) { return Family::derived; },
                          [](const family::Shifted&) { return Family::derived; },
                      },
                      v_);
}

double TailSpec::support_lo() const {
    if (const auto* sh = std::get_if<family::Shifted>(&v_)) return sh->shift + sh->base->support_lo();
    if (const auto* cap = std::get_if<family::ScaledCap>(&v_)) return cap->base->support_lo();
    return 0.0;
}

double TailSpec::tilted_tail(double x, double gamma) const {
    return std::visit(
        overloaded{
            [&](const family::PointMass&) { return x < 0.0 ? std::exp(gamma * x) : 0.0; },
            [&](const family::Exponential& e) {
                return x < 0.0 ? std::exp(gamma * x) : std::exp((gamma - e.theta) * x);
            },
            [&](const family::ExpPareto& p) {
                return x < 0.0 ? std::exp(gamma * x) : std::exp((gamma - p.gamma) * x) * std::pow(1.0 + x, -p.alpha);
            },
            [&](const family::Xi&) {
                return x < 0.0 ? std::exp(gamma * x) : std::exp((gamma - 1.0) * x) * xi::phi1_tilted(x) * xi::phi2(x);
            },
            [&](const family::MMixture& m) {
                const auto& s = m.spec;
                if (x < 0.0) return std::exp(gamma * x);
                return s.scale * (s.a * std::exp((gamma - s.gamma) * x) * std::pow(1.0 + x, -s.alpha) +
                                  (1.0 - s.a) * std::exp((gamma - s.gamma - s.beta) * x));
            },
            [&](const family::ScaledCap& c) {
                return std::min(std::exp(gamma * x), c.factor * c.base->tilted_tail(x, gamma));
            },
            [&](const family::Shifted& sh) {
                return std::exp(gamma * sh.shift) * sh.base->tilted_tail(x - sh.shift, gamma);
            },
        },
        v_);
}

bool TailSpec::moment_finite(double gamma) const {
    return std::visit(overloaded{
                          [&](const family::PointMass&) { return true; },
                          [&](const family::Exponential& e) { return gamma < e.theta; },
                          [&](const family::ExpPareto& p) { return gamma <= p.gamma; },
                          [&](const family::Xi&) { return gamma <= 1.0; },
                          [&](const family::MMixture& m) {
                              return m.spec.a > 0.0 ? gamma <= m.spec.gamma : gamma < m.spec.gamma + m.spec.beta;
                          },
                          [&](const family::ScaledCap& c) { return c.base->moment_finite(gamma); },
                          [&](const family::Shifted& sh) { return sh.base->moment_finite(gamma); },
                      },
                      v_);
}

LaplaceTail TailSpec::tail_laplace(cplx s, double from) const {
    if (!moment_finite(s.real()))
        throw ConfigError("exponential moment diverges at gamma=" + fmt_num(s.real()) + " for " + describe());
    return std::visit(
        overloaded{
            [&](const family::PointMass&) {
                return LaplaceTail{from < 0.0 ? segment(s, from, 0.0) : cplx(0.0), 0.0};
            },
            [&](const family::Exponential& e) {
                cplx acc = from < 0.0 ? segment(s, from, 0.0) : cplx(0.0);
                const double x = std::max(from, 0.0);
                acc += std::exp((s - e.theta) * x) / (e.theta - s);
                return LaplaceTail{acc, 1e-15 * std::abs(acc)};
            },
            [&](const family::ExpPareto& p) {
                cplx acc = from < 0.0 ? segment(s, from, 0.0) : cplx(0.0);
                const double x = std::max(from, 0.0);
                const cplx w = s - p.gamma;
                const auto q = special::laplace_power(w, p.alpha, 1.0 + x);
                const cplx f = std::exp(w * x);
                acc += f * q.value;
                return LaplaceTail{acc, std::abs(f) * q.error_bound};
            },
            [&](const family::Xi&) { return xi_tail_laplace(s, from); },
            [&](const family::MMixture& m) {
                const auto& sp = m.spec;
                cplx acc = from < 0.0 ? segment(s, from, 0.0) : cplx(0.0);
                const double x = std::max(from, 0.0);
                const cplx w = s - sp.gamma;
                double err = 0.0;
                if (sp.a > 0.0) {
                    const auto q = special::laplace_power(w, sp.alpha, 1.0 + x);
                    const cplx f = std::exp(w * x);
                    acc += sp.scale * sp.a * f * q.value;
                    err += sp.scale * sp.a * std::abs(f) * q.error_bound;
                }
                if (sp.a < 1.0) acc += sp.scale * (1.0 - sp.a) * std::exp((w - sp.beta) * x) / (sp.beta - w);
                return LaplaceTail{acc, err};
            },
            [&](const family::ScaledCap& c) {
                // tail is 1 up to the crossing point where factor * base tail drops to 1.
                double lo = 0.0, hi = 1.0;
                while (c.factor * c.base->tail(hi) > 1.0) hi *= 2.0;
                if (c.factor * c.base->tail(lo) <= 1.0) {
                    hi = lo;
                } else {
                    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (c.factor * c.base->tail(mid) > 1.0 ? lo : hi) = mid;
                    }
                }
                const double cross = hi;
                cplx acc = segment(s, from, cross);
                const auto rest = c.base->tail_laplace(s, std::max(from, cross));
                acc += c.factor * rest.value;
                return LaplaceTail{acc, c.factor * rest.error_bound + 1e-14 * std::abs(acc)};
            },
            [&](const family::Shifted& sh) {
                const auto base = sh.base->tail_laplace(s, from - sh.shift);
                const cplx f = std::exp(s * sh.shift);
                return LaplaceTail{f * base.value, std::abs(f) * base.error_bound};
            },
        },
        v_);
}

double TailSpec::trunc_bound(double gamma0, double x_max) const {
    if (gamma0 <= 0.0) return 0.0;
    if (std::holds_alternative<family::Xi>(v_) && x_max > 2.0 * kPi) {
        // phi2(x) <= 4 / (pi (x - 2 pi)^2) and phi1_tilted <= 3 pi + 1 + sqrt 2
        const double amp = xi::kLevel + std::sqrt(2.0);
        double bound = amp * 4.0 / (kPi * (x_max - 2.0 * kPi));
        if (gamma0 < 1.0)
            bound = std::min(bound, amp * xi::phi2(x_max) * std::exp((gamma0 - 1.0) * x_max) / (1.0 - gamma0));
        return gamma0 * bound;
    }
    const auto lt = tail_laplace(gamma0, x_max);
    return gamma0 * (std::max(lt.value.real(), 0.0) + lt.error_bound);
}

std::string TailSpec::describe() const {
    return std::visit(
        overloaded{
            [](const family::PointMass&) { return std::string("point_mass"); },
            [](const family::Exponential& e) { return "exponential(theta=" + fmt_num(e.theta) + ")"; },
            [](const family::ExpPareto& p) {
                return "exp_pareto(gamma=" + fmt_num(p.gamma) + ", alpha=" + fmt_num(p.alpha) + ")";
            },
            [](const family::Xi&) { return std::string("xi"); },
            [](const family::MMixture& m) {
                const auto& s = m.spec;
                return "m_mixture(gamma=" + fmt_num(s.gamma) + ", a=" + fmt_num(s.a) + ", alpha=" + fmt_num(s.alpha) +
                       ", beta=" + fmt_num(s.beta) + ", scale=" + fmt_num(s.scale) + ")";
            },
            [](const family::ScaledCap& c) {
                return "min(1, " + fmt_num(c.factor) + " * " + c.base->describe() + ")";
            },
            [](const family::Shifted& sh) { return "shift(" + fmt_num(sh.shift) + ", " + sh.base->describe() + ")"; },
        },
        v_);
}

TailSpec make_exp_pareto(double gamma, double alpha) {
    if (!(gamma > 0.0)) throw ConfigError("exp_pareto: gamma must be > 0");
    if (!(alpha > 1.0)) throw ConfigError("exp_pareto: alpha must be > 1");
    return TailSpec(family::ExpPareto{gamma, alpha});
}

TailSpec make_xi() { return TailSpec(family::Xi{}); }

TailSpec make_exponential(double theta) {
    if (!(theta > 0.0)) throw ConfigError("exponential: theta must be > 0");
    return TailSpec(family::Exponential{theta});
}

TailSpec make_point_mass() { return TailSpec(family::PointMass{}); }

TailSpec make_m_mixture(const MMixtureSpec& s) {
    if (!(s.gamma > 0.0)) throw ConfigError("m_mixture: gamma must be > 0");
    if (!(s.a >= 0.0 && s.a <= 1.0)) throw ConfigError("m_mixture: a must lie in [0,1]");
    if (!(s.alpha > 1.0)) throw ConfigError("m_mixture: alpha must be > 1");
    if (!(s.beta > 0.0)) throw ConfigError("m_mixture: beta must be > 0");
    if (!(s.scale > 0.0)) throw ConfigError("m_mixture: scale must be > 0");

    auto tail = [&](double x) {
        return std::exp(-s.gamma * x) * s.scale *
               (s.a * std::pow(1.0 + x, -s.alpha) + (1.0 - s.a) * std::exp(-s.beta * x));
    };
    auto slope = [&](double x) {
        const double p = s.a * std::pow(1.0 + x, -s.alpha) * (-s.gamma - s.alpha / (1.0 + x));
        const double e = (1.0 - s.a) * std::exp(-s.beta * x) * (-s.gamma - s.beta);
        return std::exp(-s.gamma * x) * s.scale * (p + e);
    };
    for (int k = 0; k <= 2000; ++k) {
        const double x = k == 0 ? 0.0 : 1e-3 * std::pow(1e7, k / 2000.0);
        if (tail(x) > 1.0) throw ConfigError("m_mixture: tail exceeds 1 at x=" + fmt_num(x));
        if (slope(x) > 0.0) throw ConfigError("m_mixture: tail increases at x=" + fmt_num(x));
    }
    return TailSpec(family::MMixture{s});
}

TailSpec make_scaled_cap(const TailSpec& base, double factor) {
    if (!(factor > 0.0)) throw ConfigError("scaled_cap: factor must be > 0");
    return TailSpec(family::ScaledCap{std::make_shared<const TailSpec>(base), factor});
}

TailSpec make_shifted(const TailSpec& base, double shift) {
    if (!std::isfinite(shift)) throw ConfigError("shift must be finite");
    return TailSpec(family::Shifted{std::make_shared<const TailSpec>(base), shift});
}

double GriddedTiltRep::tail(std::size_t j) const { return std::exp(-gamma0 * x(j)) * W[j]; }

std::size_t GriddedTiltRep::index_of(double xv) const {
    const double r = (xv - x_lo) / step;
    const long long j = std::llround(r);
    if (std::abs(r - static_cast<double>(j)) > 1e-6 || j < 0 || static_cast<std::size_t>(j) >= W.size())
        throw ConfigError("x=" + fmt_num(xv) + " is not a grid node");
    return static_cast<std::size_t>(j);
}

long GriddedTiltRep::steps_for(double a) const { return std::lround(a / step); }

void validate(const GriddedTiltRep& rep) {
    if (!(rep.step > 0.0)) throw NumericalError("rep: step must be > 0");
    if (rep.W.size() < 2) throw NumericalError("rep: need at least two nodes");
    if (!(rep.trunc_mass_bound >= 0.0)) throw NumericalError("rep: negative truncation bound");
    const double decay = std::exp(-rep.gamma0 * rep.step);
    for (std::size_t j = 0; j < rep.W.size(); ++j) {
        if (!std::isfinite(rep.W[j]) || rep.W[j] < 0.0)
            throw NumericalError("rep: W[" + std::to_string(j) + "] is negative or not finite");
        if (j + 1 < rep.W.size() && rep.W[j + 1] * decay > rep.W[j] * (1.0 + 1e-9) + 1e-300)
            throw NumericalError("rep: tail increases at x=" + fmt_num(rep.x(j)));
    }
    if (std::exp(-rep.gamma0 * rep.x_lo) * rep.W[0] > 1.0 + 1e-12) throw NumericalError("rep: tail exceeds 1");
}

GriddedTiltRep grid_from_tilted(const std::function<double(double)>& tilted, double gamma0, double step, double x_lo,
                                double x_max, double trunc_bound) {
    if (!(step > 0.0)) throw ConfigError("step must be > 0");
    if (!(x_max > x_lo)) throw ConfigError("x_max must exceed the support lower bound");
    const long long n = std::llround((x_max - x_lo) / step);
    if (n < 1) throw ConfigError("grid needs at least two nodes");
    GriddedTiltRep rep;
    rep.gamma0 = gamma0;
    rep.step = step;
    rep.x_lo = x_lo;
    rep.trunc_mass_bound = trunc_bound;
    rep.W.resize(static_cast<std::size_t>(n) + 1);
    for (std::size_t j = 0; j < rep.W.size(); ++j) {
        const double v = tilted(rep.x(j));
        if (!std::isfinite(v))
            throw NumericalError("tilted tail overflows at x=" + fmt_num(rep.x(j)) + "; choose a smaller gamma0");
        rep.W[j] = v;
    }
    return rep;
}

GriddedTiltRep to_grid(const TailSpec& spec, double gamma0, double step, double x_max) {
    if (!(gamma0 >= 0.0)) throw ConfigError("gamma0 must be >= 0");
    if (!spec.moment_finite(gamma0))
        throw ConfigError("e^{gamma0 x} tail(x) of " + spec.describe() + " is not integrable at gamma0=" +
                          fmt_num(gamma0) + "; choose a smaller gamma0");
    const double lo = spec.support_lo();
    auto rep = grid_from_tilted([&](double x) { return spec.tilted_tail(x, gamma0); }, gamma0, step, lo, x_max,
                                spec.trunc_bound(gamma0, lo + std::llround((x_max - lo) / step) * step));
    if (spec.family() != Family::point_mass && !(rep.W.back() >= 1e-290))
        throw NumericalError("tilted tail of " + spec.describe() + " underflows at x_max=" + fmt_num(rep.x_max()) +
                             "; choose a larger gamma0 or a smaller x_max");
    return rep;
}

double interval_mass(const TailSpec& spec, double x, double c) {
    if (!(c > 0.0)) throw ConfigError("interval length c must be > 0");
    return spec.tail(x) - spec.tail(x + c);
}

double interval_mass(const GriddedTiltRep& rep, double x, double c) {
    if (!(c > 0.0)) throw ConfigError("interval length c must be > 0");
    const std::size_t j = rep.index_of(x);
    const long k = rep.steps_for(c);
    if (k < 1 || j + static_cast<std::size_t>(k) >= rep.n_points())
        throw ConfigError("interval (x, x+c] leaves the grid");
    const double wk = rep.W[j + static_cast<std::size_t>(k)] * std::exp(-rep.gamma0 * static_cast<double>(k) * rep.step);
    return std::exp(-rep.gamma0 * rep.x(j)) * (rep.W[j] - wk);
}

} // namespace tiltgrid
