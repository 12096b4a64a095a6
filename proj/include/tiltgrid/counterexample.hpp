#pragma once

// End-to-end reproduction of the xi counterexample: the moment and transform
// zero, the failure of the shift limit along lattices, the convolution
// equivalence of xi^{2*}, and the non-collapsing convolution-root ratio.

#include <numbers>
#include <string>
#include <vector>

#include "tiltgrid/defaults.hpp"
#include "tiltgrid/diagnostics.hpp"
#include "tiltgrid/transforms.hpp"

namespace tiltgrid {

struct CounterexampleConfig {
    double gamma0 = defaults::kGamma0;
    double step = defaults::kStep;
    double x_max = defaults::kXMax;
    Tolerances tol;
    std::size_t lattice_max_index = defaults::kLatticeMaxIndex;
    double z_lo = 0.0;
    double z_hi = 8.0;
    double z_step = defaults::kZStep;
    double zero_tol = defaults::kZeroTol;
    std::vector<double> lambdas{0.25 * std::numbers::pi, 0.75 * std::numbers::pi, 1.75 * std::numbers::pi};
    std::vector<double> shifts{std::numbers::pi};
    bool parallel = true;
};

struct PassFlag {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct MomentZeroReport {
    double moment_closed = 0.0;
    double moment_closed_rel_error = 0.0;
    double moment_quadrature = 0.0;
    double moment_quadrature_rel_error = 0.0;
    Moment moment_grid;                ///< from the tilted grid (refinement check)
    double transform_zero_modulus = 0.0;
    double transform_zero_error_bound = 0.0;
    LimitEstimate envelope;            ///< tail(x) / (e^{-x} x^{-2}) on the trailing window
    Curve envelope_curve;
    std::vector<PassFlag> flags;
};

struct LatticeRow {
    double lambda = 0.0;
    double a = 0.0;
    double expected = 0.0;
    LatticeLimit closed_form; ///< along the closed-form tail, n up to lattice_max_index
    LatticeLimit grid;        ///< along the tilted grid
};

struct LatticeReport {
    std::vector<LatticeRow> rows;
    double spread = 0.0;       ///< max - min of the closed-form limits at fixed a
    double spread_error = 0.0;
    ClassVerdict grid_verdict; ///< L(1) on the grid
    std::vector<PassFlag> flags;
};

struct TwoFoldReport {
    double two_fold_target = 0.0;
    LimitEstimate two_fold;   ///< e^x x^2 tail(xi^{2*})
    Curve two_fold_curve;
    double four_fold_target = 0.0;
    LimitEstimate four_fold;  ///< tail(xi^{4*}) / tail(xi^{2*})
    Curve four_fold_curve;
    std::vector<std::pair<double, LimitEstimate>> lattice_two_fold; ///< per lambda
    double lambda_spread = 0.0;
    double trunc_two_fold = 0.0;
    double trunc_four_fold = 0.0;
    std::vector<PassFlag> flags;
};

struct EnvelopeRow {
    double A = 0.0;
    double middle_sup = 0.0;     ///< sup over the window of the middle-integral ratio
    double bound = 0.0;          ///< 8 / A
    double boundary_at_xmax = 0.0;
    double boundary_limit = 0.0; ///< A^{-2}
};

struct ReproductionReport {
    CounterexampleConfig config;
    MomentZeroReport moment_zero;
    LatticeReport lattice;
    TwoFoldReport two_fold_powers;
    TransformProfile xi_profile;
    std::vector<ZeroCandidate> xi_zeros;
    std::vector<ZeroCandidate> exp_pareto_zeros;
    RootRatioReport root_ratio;
    RootRatioReport root_ratio_exp_pareto;
    std::vector<EnvelopeRow> envelope_g;
    std::vector<PassFlag> flags;
    bool pass = false;
};

MomentZeroReport verify_moment_and_zero(const CounterexampleConfig& cfg);
LatticeReport verify_not_long_tailed(const CounterexampleConfig& cfg);
/// xi2 / xi4 may be supplied to avoid recomputing the convolutions.
TwoFoldReport verify_two_fold(const CounterexampleConfig& cfg, const GriddedTiltRep* xi2 = nullptr,
                               const GriddedTiltRep* xi4 = nullptr);

/// Closed-form lattice limit of e^{a} tail(lambda_n + a) / tail(lambda_n) for xi.
double xi_lattice_limit(double lambda, double a);
/// Middle-integral ratio of g(x) = 1_{[1,inf)} x^{-2} e^{-x} in closed form.
double g_middle_ratio(double x, double A);

ReproductionReport full_report(const CounterexampleConfig& cfg);

} // namespace tiltgrid
