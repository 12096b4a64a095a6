#include "tiltgrid/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/error.hpp"

namespace tiltgrid {

namespace {

using cplx = std::complex<double>;

std::vector<double> z_grid(double z_lo, double z_hi, double z_step) {
    if (!(z_step > 0.0) || !(z_hi >= z_lo)) throw ConfigError("transform: need z_lo <= z_hi and z_step > 0");
    const auto n = static_cast<std::size_t>(std::floor((z_hi - z_lo) / z_step + 1e-9)) + 1;
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = z_lo + static_cast<double>(k) * z_step;
    return z;
}

void summarize(TransformProfile& p) {
    p.min_modulus = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        const double m = std::abs(p.values[k]);
        if (m < p.min_modulus) {
            p.min_modulus = m;
            p.argmin_z = p.z_values[k];
        }
    }
}

// Rep of the tilted distribution from tilted masses already divided by the moment.
GriddedTiltRep rebuild(const TiltedMassVector& m, double gamma0_out, std::size_t n_nodes) {
    GriddedTiltRep out;
    out.gamma0 = gamma0_out;
    out.step = m.step;
    out.x_lo = m.x_lo;
    out.W.assign(n_nodes, 0.0);
    const double h = m.step;
    const double cell = std::exp(-gamma0_out * h);
    const double half = std::exp(-0.5 * gamma0_out * h);
    // W_j = sum_{i >= j} nu_i e^{-g (mid_i - x_j)} + beyond e^{-g (x_max - x_j)}
    double s = m.beyond;
    out.W[n_nodes - 1] = s;
    for (std::size_t j = n_nodes - 1; j-- > 0;) {
        s = s * cell + m.masses[j] * half;
        out.W[j] = s;
    }
    return out;
}

} // namespace

Moment exp_moment(const TailSpec& spec, double gamma) {
    if (!spec.moment_finite(gamma)) return Moment::divergent();
    const double lo = spec.support_lo();
    const auto lt = spec.tail_laplace(gamma, lo);
    Moment m;
    m.value = std::exp(gamma * lo) + gamma * lt.value.real();
    m.error_bound = std::abs(gamma) * lt.error_bound;
    return m;
}

Moment exp_moment(const GriddedTiltRep& rep, double gamma) {
    if (gamma > rep.gamma0 + 1e-12)
        throw ConfigError("exp_moment: gamma exceeds the rep's reference tilt; the tilted array cannot represent it");
    const auto m = to_masses(rep);
    const double d = gamma - rep.gamma0;
    const double h = rep.step;
    double sum = m.atom_at_lo * std::exp(d * rep.x_lo);
    double mid_factor = std::exp(d * (rep.x_lo + 0.5 * h));
    const double cell = std::exp(d * h);
    for (const double v : m.masses) {
        sum += v * mid_factor;
        mid_factor *= cell;
    }
    const double edge = std::exp(d * rep.x_max());
    sum += m.beyond * edge;
    Moment out;
    out.value = sum;
    out.error_bound = rep.trunc_mass_bound * edge + sum * (std::abs(d) * h / 2.0 + rep.disc_error_rel);
    return out;
}

Moment quadrature_moment(const TailSpec& spec, double gamma, double panel, int cells_per_panel, double x_far) {
    if (!spec.moment_finite(gamma)) return Moment::divergent();
    if (!(panel > 0.0) || cells_per_panel < 2 || cells_per_panel % 2 != 0)
        throw ConfigError("quadrature_moment: need panel > 0 and an even cell count");
    const double lo = spec.support_lo();
    const double h = panel / cells_per_panel;
    const auto n_panels = static_cast<long>(std::ceil((x_far - lo) / panel));
    double integral = 0.0;
    for (long p = 0; p < n_panels; ++p) {
        const double a = lo + static_cast<double>(p) * panel;
        const double b = a + panel;
        double s = spec.tilted_tail(a, gamma);
        // left limit at the panel end: the integrand may jump there
        s += spec.tilted_tail(std::nextafter(b, a), gamma);
        for (int k = 1; k < cells_per_panel; ++k) s += (k % 2 ? 4.0 : 2.0) * spec.tilted_tail(a + k * h, gamma);
        integral += s * h / 3.0;
    }
    Moment m;
    m.value = std::exp(gamma * lo) + gamma * integral;
    // the part beyond the last panel is not integrated; its envelope bound is the error
    m.error_bound = spec.trunc_bound(gamma, lo + static_cast<double>(n_panels) * panel);
    return m;
}

std::complex<double> transform_at(const TailSpec& spec, cplx s, double* error_bound) {
    if (!spec.moment_finite(s.real())) throw ConfigError("transform: moment diverges for " + spec.describe());
    const double lo = spec.support_lo();
    const auto lt = spec.tail_laplace(s, lo);
    if (error_bound) *error_bound = std::abs(s) * lt.error_bound;
    return std::exp(s * lo) + s * lt.value;
}

std::complex<double> transform_at(const GriddedTiltRep& rep, cplx s, double* error_bound) {
    if (s.real() > rep.gamma0 + 1e-12) throw ConfigError("transform: gamma exceeds the rep's reference tilt");
    const auto m = to_masses(rep);
    const cplx d = s - rep.gamma0;
    const double h = rep.step;
    cplx sum = m.atom_at_lo * std::exp(d * rep.x_lo);
    const cplx cell = std::exp(d * h);
    double real_sum = 0.0;
    cplx factor = std::exp(d * (rep.x_lo + 0.5 * h));
    for (std::size_t i = 0; i < m.masses.size(); ++i) {
        if (i % 1024 == 0) factor = std::exp(d * (rep.x_lo + (static_cast<double>(i) + 0.5) * h));
        sum += m.masses[i] * factor;
        real_sum += m.masses[i] * std::abs(factor);
        factor *= cell;
    }
    const cplx edge = std::exp(d * rep.x_max());
    sum += m.beyond * edge;
    if (error_bound) {
        const double abs_edge = std::abs(edge);
        const double spread = s.imag() != 0.0 ? 2.0 * m.beyond * abs_edge : 0.0;
        *error_bound = rep.trunc_mass_bound * abs_edge + spread +
                       (real_sum + m.atom_at_lo) * (std::abs(d) * h / 2.0 + rep.disc_error_rel);
    }
    return sum;
}

TransformProfile complex_transform(const TailSpec& spec, double gamma, double z_lo, double z_hi, double z_step) {
    if (!spec.moment_finite(gamma))
        throw ConfigError("transform: exponential moment diverges at gamma for " + spec.describe());
    TransformProfile p;
    p.gamma = gamma;
    p.z_values = z_grid(z_lo, z_hi, z_step);
    p.values.resize(p.z_values.size());
    for (std::size_t k = 0; k < p.z_values.size(); ++k) {
        double err = 0.0;
        p.values[k] = transform_at(spec, cplx(gamma, p.z_values[k]), &err);
        p.quadrature_error_bound = std::max(p.quadrature_error_bound, err);
    }
    summarize(p);
    return p;
}

TransformProfile complex_transform(const GriddedTiltRep& rep, double gamma, double z_lo, double z_hi, double z_step) {
    TransformProfile p;
    p.gamma = gamma;
    p.step = rep.step;
    p.z_values = z_grid(z_lo, z_hi, z_step);
    p.values.resize(p.z_values.size());
    for (std::size_t k = 0; k < p.z_values.size(); ++k) {
        double err = 0.0;
        p.values[k] = transform_at(rep, cplx(gamma, p.z_values[k]), &err);
        p.quadrature_error_bound = std::max(p.quadrature_error_bound, err);
    }
    summarize(p);
    return p;
}

std::vector<ZeroCandidate> find_zero_candidates(const TransformProfile& profile, double tol,
                                                const TransformFn& evaluate) {
    std::vector<ZeroCandidate> out;
    const auto& z = profile.z_values;
    const std::size_t n = z.size();
    if (n < 3) return out;
    const double accept = std::max(tol, 10.0 * profile.quadrature_error_bound);
    std::vector<double> mod(n);
    for (std::size_t k = 0; k < n; ++k) mod[k] = std::abs(profile.values[k]);

    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (!(mod[k] <= mod[k - 1] && mod[k] < mod[k + 1])) continue;
        ZeroCandidate c;
        if (evaluate) {
            constexpr double kInvPhi = 0.6180339887498949;
            double a = z[k - 1], b = z[k + 1];
            double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
            double f1 = std::abs(evaluate(x1)), f2 = std::abs(evaluate(x2));
            while (b - a > 1e-10) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - kInvPhi * (b - a);
                    f1 = std::abs(evaluate(x1));
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + kInvPhi * (b - a);
                    f2 = std::abs(evaluate(x2));
                }
            }
            c.z = 0.5 * (a + b);
            c.modulus = std::abs(evaluate(c.z));
        } else {
            // parabola through (z, |F|^2) at the three samples
            const double y0 = mod[k - 1] * mod[k - 1], y1 = mod[k] * mod[k], y2 = mod[k + 1] * mod[k + 1];
            const double dz = z[k + 1] - z[k];
            const double curv = y0 - 2.0 * y1 + y2;
            const double shift = curv > 0.0 ? 0.5 * dz * (y0 - y2) / curv : 0.0;
            c.z = z[k] + std::clamp(shift, -dz, dz);
            const double ymin = curv > 0.0 ? y1 - (y0 - y2) * (y0 - y2) / (8.0 * curv) : y1;
            c.modulus = std::sqrt(std::max(0.0, ymin));
        }
        if (c.modulus <= accept) out.push_back(c);
    }
    return out;
}

GriddedTiltRep tilt(const GriddedTiltRep& rep, double gamma) {
    const auto mom = exp_moment(rep, gamma);
    if (mom.infinite || !(mom.value > 0.0)) throw NumericalError("tilt: moment is not finite and positive");
    auto m = to_masses(rep);
    const double inv = 1.0 / mom.value;
    for (double& v : m.masses) v *= inv;
    m.beyond *= inv;
    auto out = rebuild(m, rep.gamma0 - gamma, rep.W.size());
    out.trunc_mass_bound = rep.trunc_mass_bound * inv;
    out.disc_error_rel = rep.disc_error_rel + std::abs(gamma) * rep.step / 2.0;
    return out;
}

GriddedTiltRep tilt(const TailSpec& spec, double gamma, double gamma0, double step, double x_max) {
    const auto mom = exp_moment(spec, gamma);
    if (mom.infinite) throw ConfigError("tilt: exponential moment diverges for " + spec.describe());
    if (gamma > gamma0) throw ConfigError("tilt: gamma must not exceed gamma0");
    const double g_out = gamma0 - gamma;
    const double inv = 1.0 / mom.value;
    // tail of the tilted law: (e^{gamma x} tail(x) + gamma \int_x^inf e^{gamma u} tail(u) du) / mu^(gamma)
    auto tilted = [&](double x) {
        const double lap = gamma != 0.0 ? gamma * spec.tail_laplace(gamma, x).value.real() : 0.0;
        return std::exp(g_out * x) * (spec.tilted_tail(x, gamma) + lap) * inv;
    };
    const double lo = spec.support_lo();
    auto out = grid_from_tilted(tilted, g_out, step, lo, x_max, 0.0);
    if (g_out > 0.0 && spec.moment_finite(gamma0)) {
        const auto lt = spec.tail_laplace(gamma0, out.x_max());
        out.trunc_mass_bound = g_out * (std::abs(lt.value) + lt.error_bound) * inv;
    }
    return out;
}

SmoothingKernel::SmoothingKernel(double g, double cc) : gamma(g), c(cc) {
    if (!(g > 0.0)) throw ConfigError("smoothing kernel: gamma must be > 0");
    if (!(cc > 0.0)) throw ConfigError("smoothing kernel: c must be > 0");
    c1 = 1.0 / g - (-std::expm1(-g * cc)) / (g * g * cc);
}

double SmoothingKernel::density(double x) const {
    if (x < 0.0 || x >= c) return 0.0;
    return std::exp(-gamma * x) * (1.0 - x / c) / c1;
}

double SmoothingKernel::tail(double x) const {
    if (x < 0.0) return 1.0;
    if (x >= c) return 0.0;
    // \int_x^c e^{-gamma u}(1 - u/c) du with antiderivative -F(u)
    const double b = 1.0 / (gamma * c);
    auto F = [&](double u) { return std::exp(-gamma * u) * ((b - 1.0) / gamma + b * u); };
    return (F(c) - F(x)) / c1;
}

double SmoothingKernel::tilted_integral() const { return c / (2.0 * c1); }

GriddedTiltRep kernel_rep(const SmoothingKernel& k, double gamma0, double step, double x_max) {
    return grid_from_tilted([&](double x) { return std::exp(gamma0 * x) * k.tail(x); }, gamma0, step, 0.0, x_max, 0.0);
}

GriddedTiltRep smooth(const GriddedTiltRep& rep, double gamma, double c) {
    const SmoothingKernel k(gamma, c);
    auto kr = kernel_rep(k, rep.gamma0, rep.step, rep.step * static_cast<double>(rep.W.size() - 1));
    return conv(rep, kr);
}

GriddedTiltRep smooth(const TailSpec& spec, double gamma, double c, double gamma0, double step, double x_max) {
    return smooth(to_grid(spec, gamma0, step, x_max), gamma, c);
}

} // namespace tiltgrid
