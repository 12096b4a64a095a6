#pragma once

// Class-membership diagnostics. Every limit at infinity is replaced by a
// trailing-window band; verdicts compare bands against explicit tolerances.

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tiltgrid/defaults.hpp"
#include "tiltgrid/dist_core.hpp"

namespace tiltgrid {

struct LimitEstimate {
    double window_inf = 0.0;
    double window_sup = 0.0;
    double trend = 0.0; ///< mean of second half-window minus mean of first
    std::size_t windows_used = 0; ///< samples in the trailing window
    double x_from = 0.0;
    double x_to = 0.0;
    bool sufficient = false; ///< at least kMinWindowSamples samples

    double mid() const { return 0.5 * (window_inf + window_sup); }
    double width() const { return window_sup - window_inf; }
};

/// Band over the trailing window [x_hi (1 - window_frac), x_hi] of sorted samples.
LimitEstimate estimate_limit(const std::vector<double>& x, const std::vector<double>& value, double window_frac,
                             std::size_t min_samples = defaults::kMinWindowSamples);

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

struct Tolerances {
    double window_frac = defaults::kWindowFrac;
    double band_tol = defaults::kBandTol;
    double value_tol = defaults::kValueTol;
};

struct Curve {
    std::string name;
    std::vector<double> x;
    std::vector<double> value;
};

struct ClassVerdict {
    std::string class_name;
    double gamma = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> target;
    LimitEstimate estimate;
    Tolerances tolerances;
    double numerical_error = 0.0; ///< relative error budget of the sampled values
    std::string reason;
    std::vector<Curve> evidence;
    std::vector<std::pair<double, double>> epsilon_sweep; ///< (A, eps(A))
    std::vector<ClassVerdict> parts;
};

/// Verdict rule shared by all diagnostics (relative to the target, or to the
/// band midpoint when there is no target). A miss or a wide band is only a
/// certified failure when it exceeds tolerance plus numerical error and is not
/// explained by drift still moving toward the target.
Verdict decide(const LimitEstimate& e, std::optional<double> target, const Tolerances& tol, double numerical_error,
               std::string* reason = nullptr);

/// Tilted tail W(x) = e^{gamma0 x} tail(x) at any requested x; a rep snaps x to its nodes.
struct TailSampler {
    double gamma0 = 0.0;
    double step = 0.0; ///< sampling step (rep step, or the spacing used for a closed form)
    double x_lo = 0.0;
    double x_hi = 0.0;
    double error_rel = 0.0;
    std::function<double(double)> W;

    static TailSampler from_rep(const GriddedTiltRep& rep);
    static TailSampler from_spec(const TailSpec& spec, double gamma0, double step, double x_hi);

    std::vector<double> nodes(double from, double to) const;
    double snap(double a) const;
};

/// L(gamma): e^{gamma a} tail(x + a) / tail(x) -> 1 for every shift a.
ClassVerdict test_L_gamma(const TailSampler& s, double gamma, const std::vector<double>& shifts,
                          const Tolerances& tol = {});
ClassVerdict test_L_gamma(const GriddedTiltRep& rep, double gamma, const std::vector<double>& shifts = {1.0, std::numbers::pi, 2.0},
                          const Tolerances& tol = {});

struct LatticeLimit {
    double lambda = 0.0; ///< residue actually used (snapped)
    double a = 0.0;
    LimitEstimate estimate;
    double last_value = 0.0;
    Curve series; ///< x = lattice index n
};

/// Ratios e^{gamma a} tail(lambda + 2 pi n + a) / tail(lambda + 2 pi n) along n.
std::vector<LatticeLimit> lattice_limits(const TailSampler& s, double gamma, double a, const std::vector<double>& lambdas,
                                         const Tolerances& tol = {}, double period = 2.0 * std::numbers::pi);

/// Middle-integral ratio \int_{(A, x-A]} tail(x-u) mu(du) / tail(x), trailing-window sup per A.
std::vector<std::pair<double, double>> epsilon_sweep(const GriddedTiltRep& rep, const std::vector<double>& A_values,
                                                     const Tolerances& tol = {});

/// S(gamma): tail(mu^{2*}) / tail(mu) -> 2 mu^(gamma). `moment` overrides the rep-based moment.
ClassVerdict test_S_gamma(const GriddedTiltRep& rep, double gamma, const Tolerances& tol = {},
                          std::optional<double> moment = std::nullopt,
                          const std::vector<double>& A_values = {10.0, 20.0, 40.0});
/// Same with mu^{2*} supplied (e.g. computed once and shared).
ClassVerdict test_S_gamma(const GriddedTiltRep& rep, const GriddedTiltRep& rep2, double gamma, const Tolerances& tol = {},
                          std::optional<double> moment = std::nullopt,
                          const std::vector<double>& A_values = {10.0, 20.0, 40.0});

/// L_Delta (interval masses long-tailed under the shifts) and S_Delta
/// (rho^{2*}((x,x+c]) / rho((x,x+c]) -> 2) for one c.
ClassVerdict test_L_delta(const GriddedTiltRep& rep, double c, const Tolerances& tol = {},
                          const std::vector<double>& shifts = {1.0, std::numbers::pi, 2.0});
ClassVerdict test_S_delta(const GriddedTiltRep& rep, double c, const Tolerances& tol = {},
                          const GriddedTiltRep* rep2 = nullptr);
/// S_loc: S_Delta for every c of the ladder.
ClassVerdict test_S_loc(const GriddedTiltRep& rep, const std::vector<double>& c_ladder = {0.25, 0.5, 1.0, 2.0, 4.0},
                        const Tolerances& tol = {});

/// Interval masses mu((x_j, x_j + c]) e^{gamma0 x_j} in tilted form, per node (NaN past the grid).
std::vector<double> tilted_interval_masses(const GriddedTiltRep& rep, double c);

struct DensityGrid {
    double step = 0.0;
    std::vector<double> g; ///< g(j step), j >= 0
};

/// S_ac: (g*g)(x) / g(x) -> 2.
ClassVerdict density_subexp_check(const DensityGrid& g, const Tolerances& tol = {});

struct JkReport {
    int n = 2;
    double A = 0.0;
    std::vector<double> x;
    std::vector<double> J1, J2, J3; ///< tilted: e^{gamma0 x} J_k(x)
    std::vector<double> tail_n;      ///< tilted tail of mu^{n*}
    std::vector<double> residual_41; ///< (n J1 + n J2 - T) / T
    std::vector<double> residual_42; ///< (T - (n J1 - n(n-3)/2 J2 - n(n-1)/2 J3)) / T
    double epsilon_A = 0.0;
    double min_residual_41 = 0.0;
    double min_residual_42 = 0.0;
};

/// J_1, J_2, J_3 on nodes x > n A; `powers` may carry mu^{(n-1)*} and mu^{n*}.
JkReport jk_decomposition(const GriddedTiltRep& rep, int n, double A, const Tolerances& tol = {},
                          const GriddedTiltRep* power_n_minus_1 = nullptr, const GriddedTiltRep* power_n = nullptr);

struct RootRatioReport {
    int n = 2;
    LimitEstimate band;
    double D_star_upper = 0.0;
    double D_star_lower = 0.0;
    double predicted = 0.0;
    Verdict collapse = Verdict::inconclusive; ///< holds when the band collapses to the prediction
    std::string reason;
    Curve curve;
};

/// tail(mu)/tail(mu^{n*}) against n^{-1} mu^(gamma)^{1-n}.
RootRatioReport conv_root_ratio(const GriddedTiltRep& rep, int n, double gamma, const Tolerances& tol = {},
                                std::optional<double> moment = std::nullopt, const GriddedTiltRep* power_n = nullptr);

} // namespace tiltgrid
