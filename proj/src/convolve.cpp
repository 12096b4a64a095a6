#include "tiltgrid/convolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <fftw3.h>

#include "tiltgrid/error.hpp"

namespace tiltgrid {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_array(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) throw NumericalError("fft: allocation failed");
    return std::unique_ptr<T[], FftwFree>(p);
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Tilted mass of a rep beyond x (x a node), including the beyond atom and its bound.
double mass_beyond(const TiltedMassVector& m, std::size_t node) {
    double s = m.beyond + m.trunc_mass_bound;
    for (std::size_t i = node; i < m.masses.size(); ++i) s += m.masses[i];
    return s;
}

} // namespace

double TiltedMassVector::total() const {
    double s = atom_at_lo + beyond;
    for (const double v : masses) s += v;
    return s;
}

TiltedMassVector to_masses(const GriddedTiltRep& rep) {
    if (rep.W.size() < 2) throw ConfigError("rep needs at least two nodes");
    TiltedMassVector m;
    m.gamma0 = rep.gamma0;
    m.step = rep.step;
    m.x_lo = rep.x_lo;
    m.trunc_mass_bound = rep.trunc_mass_bound;
    m.atom_at_lo = std::max(0.0, std::exp(rep.gamma0 * rep.x_lo) - rep.W[0]);
    m.beyond = rep.W.back();
    const double half = std::exp(0.5 * rep.gamma0 * rep.step);
    const double decay = std::exp(-rep.gamma0 * rep.step);
    m.masses.resize(rep.W.size() - 1);
    for (std::size_t j = 0; j + 1 < rep.W.size(); ++j) {
        const double d = rep.W[j] - decay * rep.W[j + 1];
        if (d < -1e-12 * rep.W[j] - 1e-300)
            throw NumericalError("negative cell mass at x=" + std::to_string(rep.x(j)) + " (rep is not monotone)");
        m.masses[j] = half * std::max(d, 0.0);
    }
    return m;
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_len = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < out_len) n <<= 1;
    const std::size_t nc = n / 2 + 1;

    auto ra = fftw_array<double>(n);
    auto rb = fftw_array<double>(n);
    auto ca = fftw_array<fftw_complex>(nc);
    auto cb = fftw_array<fftw_complex>(nc);

    fftw_plan fa, fb, inv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(), FFTW_ESTIMATE);
        fb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(), FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(), FFTW_ESTIMATE);
    }
    std::fill(ra.get(), ra.get() + n, 0.0);
    std::fill(rb.get(), rb.get() + n, 0.0);
    std::copy(a.begin(), a.end(), ra.get());
    std::copy(b.begin(), b.end(), rb.get());
    fftw_execute(fa);
    fftw_execute(fb);
    for (std::size_t k = 0; k < nc; ++k) {
        const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re;
        ca[k][1] = im;
    }
    fftw_execute(inv);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fa);
        fftw_destroy_plan(fb);
        fftw_destroy_plan(inv);
    }
    std::vector<double> out(out_len);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < out_len; ++k) out[k] = std::max(0.0, ra[k] * scale);
    return out;
}

GriddedTiltRep conv(const GriddedTiltRep& a, const GriddedTiltRep& b, double trunc_cap) {
    if (!same(a.gamma0, b.gamma0) && !(a.gamma0 == 0.0 && b.gamma0 == 0.0))
        throw ConfigError("conv: reference tilts differ");
    if (!same(a.step, b.step)) throw ConfigError("conv: grid steps differ");
    if (a.W.size() != b.W.size()) throw ConfigError("conv: node counts differ");

    const auto ma = to_masses(a);
    const auto mb = to_masses(b);
    const std::size_t n_nodes = a.W.size();
    const std::size_t n_cells = n_nodes - 1;
    const double g = a.gamma0;
    const double h = a.step;

    // Cell i of A and cell k of B meet at node i + k + 1.
    const auto smeared = fft_convolve(ma.masses, mb.masses);
    const std::size_t last_node = smeared.size(); // node index of the farthest pair
    const std::size_t q_max = 2 * last_node;

    auto mass_at = [&](std::size_t q) {
        if (q % 2 == 1) {
            const std::size_t k = (q - 1) / 2;
            return k < n_cells ? ma.atom_at_lo * mb.masses[k] + mb.atom_at_lo * ma.masses[k] : 0.0;
        }
        const std::size_t node = q / 2;
        return node >= 1 ? smeared[node - 1] : ma.atom_at_lo * mb.atom_at_lo;
    };

    GriddedTiltRep out;
    out.gamma0 = g;
    out.step = h;
    out.x_lo = a.x_lo + b.x_lo;
    out.W.assign(n_nodes, 0.0);

    const double half_decay = std::exp(-0.5 * g * h);
    double s = 0.0;
    for (std::size_t q = q_max + 1; q-- > 0;) {
        s = s * half_decay + mass_at(q);
        if (q % 2 == 0 && q / 2 < n_nodes) {
            const std::size_t j = q / 2;
            const double at_node = mass_at(q);
            // strictly-above mass plus half of the smeared node mass
            out.W[j] = j == 0 ? s - at_node : s - 0.5 * at_node;
        }
    }

    const double xa = a.x_max();
    const double xb = b.x_max();
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double x = out.x(j);
        const double ta = ma.beyond * std::exp(-g * (xa - x));
        const double tb = mb.beyond * std::exp(-g * (xb - x));
        const double tab = ma.beyond * mb.beyond * std::exp(-g * (xa + xb - x));
        out.W[j] += ta + tb - tab;
    }

    const double total_a = ma.total() + ma.trunc_mass_bound;
    const double total_b = mb.total() + mb.trunc_mass_bound;
    const std::size_t half_nodes = n_cells / 2;
    const double far = mass_beyond(ma, half_nodes) * total_b + mass_beyond(mb, half_nodes) * total_a;
    out.trunc_mass_bound = std::max(0.0, far - out.W.back());
    out.disc_error_rel = a.disc_error_rel + b.disc_error_rel + 0.5 * g * h;

    const double total = total_a * total_b;
    if (out.trunc_mass_bound > trunc_cap * total)
        throw NumericalError("conv: truncation bound " + std::to_string(out.trunc_mass_bound) + " exceeds " +
                             std::to_string(trunc_cap) + " of the tilted total; use a larger x_max");
    return out;
}

GriddedTiltRep conv_pow(const GriddedTiltRep& rep, int n, double trunc_cap) {
    if (n < 1) throw ConfigError("conv_pow: n must be >= 1");
    std::optional<GriddedTiltRep> result;
    GriddedTiltRep base = rep;
    while (n > 0) {
        if (n & 1) result = result ? conv(*result, base, trunc_cap) : base;
        n >>= 1;
        if (n > 0) base = conv(base, base, trunc_cap);
    }
    return *result;
}

} // namespace tiltgrid
