#pragma once

#include <cmath>
#include <numbers>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/defaults.hpp"
#include "tiltgrid/dist_core.hpp"

namespace fx {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kH = tiltgrid::defaults::kStep;
inline constexpr double kXMax = tiltgrid::defaults::kXMax;
inline constexpr double kXiMoment = 3.0 * kPi + 2.0;

inline const tiltgrid::GriddedTiltRep& xi() {
    static const auto r = tiltgrid::to_grid(tiltgrid::make_xi(), 1.0, kH, kXMax);
    return r;
}
inline const tiltgrid::GriddedTiltRep& xi2() {
    static const auto r = tiltgrid::conv(xi(), xi());
    return r;
}
inline const tiltgrid::GriddedTiltRep& exp_pareto() {
    static const auto r = tiltgrid::to_grid(tiltgrid::make_exp_pareto(1.0, 2.0), 1.0, kH, kXMax);
    return r;
}
inline const tiltgrid::GriddedTiltRep& m_mixture() {
    static const auto r = tiltgrid::to_grid(tiltgrid::make_m_mixture({1.0, 0.5, 2.0, 1.0, 1.0}), 1.0, kH, kXMax);
    return r;
}

inline double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace fx
