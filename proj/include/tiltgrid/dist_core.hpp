#pragma once

// Distribution families on a half line and their tilted-grid representation.
//
// A TailSpec knows its tail in closed form, and more usefully its *tilted*
// tail e^{gamma x} tail(x), which stays representable long after tail(x)
// itself has underflowed.  GriddedTiltRep samples the tilted tail on a
// uniform grid and is what convolution and the diagnostics consume.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tiltgrid {

enum class Family { point_mass, exponential, exp_pareto, xi_counterexample, m_mixture, derived };

std::string to_string(Family f);

/// Tail e^{-gamma x} scale (a (1+x)^{-alpha} + (1-a) e^{-beta x}) on [0, inf).
struct MMixtureSpec {
    double gamma = 1.0;
    double a = 0.5;
    double alpha = 2.0; ///< long-tailed factor (1+x)^{-alpha}
    double beta = 1.0;  ///< decreasing factor e^{-beta x}
    double scale = 1.0;
};

namespace family {
struct PointMass {};
struct Exponential { double theta; };
struct ExpPareto { double gamma; double alpha; };
struct Xi {};
struct MMixture { MMixtureSpec spec; };
} // namespace family

class TailSpec;

namespace family {
/// min(1, factor * base tail): tail-equivalent to the base, as a valid distribution.
struct ScaledCap { std::shared_ptr<const TailSpec> base; double factor; };
/// base shifted right by `shift` (support [shift, inf) when base lives on [0, inf)).
struct Shifted { std::shared_ptr<const TailSpec> base; double shift; };
} // namespace family

/// Result of a Laplace-type tail integral \int_from^\infty e^{s u} tail(u) du.
struct LaplaceTail {
    std::complex<double> value;
    double error_bound = 0.0;
};

class TailSpec {
public:
    using Variant = std::variant<family::PointMass, family::Exponential, family::ExpPareto, family::Xi,
                                 family::MMixture, family::ScaledCap, family::Shifted>;

    explicit TailSpec(Variant v);

    Family family() const;
    const Variant& variant() const { return v_; }
    double support_lo() const;

    double tail(double x) const { return tilted_tail(x, 0.0); }
    /// e^{gamma x} tail(x), evaluated without forming tail(x).
    double tilted_tail(double x, double gamma) const;

    /// Whether \int e^{gamma x} mu(dx) is finite; decided from the parameters.
    bool moment_finite(double gamma) const;

    /// Bound on gamma0 \int_{x_max}^\infty e^{gamma0 u} tail(u) du, i.e. the tilted
    /// mass beyond x_max minus the boundary term e^{gamma0 x_max} tail(x_max).
    double trunc_bound(double gamma0, double x_max) const;

    /// \int_from^\infty e^{s u} tail(u) du in closed form (or controlled quadrature).
    /// Requires moment_finite(Re s). Throws ConfigError when no closed form exists
    /// for complex s (ScaledCap).
    LaplaceTail tail_laplace(std::complex<double> s, double from) const;

    std::string describe() const;

private:
    Variant v_;
};

TailSpec make_exp_pareto(double gamma, double alpha);
TailSpec make_xi();
TailSpec make_m_mixture(const MMixtureSpec& spec);
TailSpec make_exponential(double theta);
TailSpec make_point_mass();
TailSpec make_scaled_cap(const TailSpec& base, double factor);
TailSpec make_shifted(const TailSpec& base, double shift);

namespace xi {
inline constexpr double kLevel = 3.0 * 3.14159265358979323846 + 1.0; // 3 pi + 1
double phi1(double x);
double phi2(double x);
/// e^x phi1(x) = 3 pi + 1 + sqrt 2 sin(x - pi/4)
double phi1_tilted(double x);
} // namespace xi

/// Uniform-grid sample of W(x) = e^{gamma0 x} tail(x).
struct GriddedTiltRep {
    double gamma0 = 0.0;
    double step = 0.0;
    double x_lo = 0.0;
    std::vector<double> W;
    double trunc_mass_bound = 0.0;
    /// Estimated relative discretization error carried by W (0 for closed-form grids).
    double disc_error_rel = 0.0;

    std::size_t n_points() const { return W.size(); }
    double x(std::size_t j) const { return x_lo + static_cast<double>(j) * step; }
    double x_max() const { return x(W.size() - 1); }
    /// Untilted tail at node j (may underflow to 0 far out; use W for ratios).
    double tail(std::size_t j) const;
    /// Node index of x; throws ConfigError when x is not a node.
    std::size_t index_of(double x) const;
    /// Number of steps in a shift of length a (rounded to the nearest node).
    long steps_for(double a) const;
};

/// Throws NumericalError when a rep violates its invariants.
void validate(const GriddedTiltRep& rep);

/// Sample a tilted tail function on [x_lo, x_max]; the last node lands on x_max
/// rounded to the grid.
GriddedTiltRep grid_from_tilted(const std::function<double(double)>& tilted, double gamma0, double step,
                                double x_lo, double x_max, double trunc_bound);

GriddedTiltRep to_grid(const TailSpec& spec, double gamma0, double step, double x_max);

/// mu((x, x+c]) from the closed form.
double interval_mass(const TailSpec& spec, double x, double c);
/// mu((x, x+c]) on the grid; x and x+c are snapped to nodes.
double interval_mass(const GriddedTiltRep& rep, double x, double c);

} // namespace tiltgrid
