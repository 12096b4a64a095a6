#pragma once

// Exponential moments, the transform along a vertical line, exponential
// tilting and kernel smoothing.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tiltgrid/dist_core.hpp"

namespace tiltgrid {

/// A gamma-moment; `infinite` marks a divergent defining integral.
struct Moment {
    double value = 0.0;
    double error_bound = 0.0;
    bool infinite = false;

    static Moment divergent() { return {0.0, 0.0, true}; }
};

/// Closed form per family; divergence decided from the parameters.
Moment exp_moment(const TailSpec& spec, double gamma);
/// From the rep's tilted cell masses; needs gamma <= gamma0.
Moment exp_moment(const GriddedTiltRep& rep, double gamma);

/// Pure quadrature cross-check: Simpson on panels of length `panel` (split
/// into `cells_per_panel` cells, panel ends taken as one-sided limits),
/// integrated up to x_far. No closed-form integrals are used.
Moment quadrature_moment(const TailSpec& spec, double gamma, double panel, int cells_per_panel, double x_far);

struct TransformProfile {
    double gamma = 0.0;
    std::vector<double> z_values;
    std::vector<std::complex<double>> values;
    double min_modulus = 0.0;
    double argmin_z = 0.0;
    double quadrature_error_bound = 0.0;
    double step = 0.0; ///< grid step for rep-based profiles, 0 for closed form
};

using TransformFn = std::function<std::complex<double>(double z)>;

/// mu^(gamma + i z) from the closed form.
std::complex<double> transform_at(const TailSpec& spec, std::complex<double> s, double* error_bound = nullptr);
/// mu^(gamma + i z) from midpoint-placed cell masses.
std::complex<double> transform_at(const GriddedTiltRep& rep, std::complex<double> s, double* error_bound = nullptr);

TransformProfile complex_transform(const TailSpec& spec, double gamma, double z_lo, double z_hi, double z_step);
TransformProfile complex_transform(const GriddedTiltRep& rep, double gamma, double z_lo, double z_hi, double z_step);

struct ZeroCandidate {
    double z = 0.0;
    double modulus = 0.0;
};

/// Refinement rule used by find_zero_candidates; recorded in transform outputs.
inline constexpr const char* kZeroRefinementRule =
    "golden-section on |F| within the bracketing samples to |dz|<1e-10 when an evaluator is given, "
    "else parabola fit of |F|^2; accept when modulus <= max(tol, 10*quadrature_error_bound)";

/// Local minima of the sampled modulus that refine to a modulus below
/// max(tol, 10 * quadrature_error_bound).
std::vector<ZeroCandidate> find_zero_candidates(const TransformProfile& profile, double tol,
                                                const TransformFn& evaluate = {});

/// Tilt mu -> e^{gamma x} mu(dx) / mu^(gamma). The output reference tilt is
/// rep.gamma0 - gamma (so gamma <= rep.gamma0 is required); masses are divided
/// by the rep-consistent moment, which makes tilt(tilt(., g), -g) exact.
GriddedTiltRep tilt(const GriddedTiltRep& rep, double gamma);
/// Closed-form tilt sampled on the grid; output reference tilt gamma0 - gamma.
GriddedTiltRep tilt(const TailSpec& spec, double gamma, double gamma0, double step, double x_max);

/// f_c(x) = c1^{-1} e^{-gamma x} (1 - x/c) on [0, c).
struct SmoothingKernel {
    double gamma = 1.0;
    double c = 1.0;
    double c1 = 0.0;

    SmoothingKernel(double gamma, double c);
    double density(double x) const;
    double tail(double x) const;
    /// \int_0^c e^{gamma u} f_c(u) du
    double tilted_integral() const;
};

GriddedTiltRep kernel_rep(const SmoothingKernel& k, double gamma0, double step, double x_max);

/// Rep of (f_c(x) dx) * mu on the rep's grid.
GriddedTiltRep smooth(const GriddedTiltRep& rep, double gamma, double c);
GriddedTiltRep smooth(const TailSpec& spec, double gamma, double c, double gamma0, double step, double x_max);

} // namespace tiltgrid
