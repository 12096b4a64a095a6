#pragma once

// Versioned defaults. Every report embeds kDefaultsVersion so results from
// different threshold sets are never compared by accident.

#include <cstddef>
#include <numbers>

namespace tiltgrid::defaults {

inline constexpr const char* kCodeVersion = "tiltgrid 1.0.0";
inline constexpr const char* kDefaultsVersion = "defaults-2026.1";

// Grid
inline constexpr double kGamma0 = 1.0;
inline constexpr double kStep = std::numbers::pi / 512.0;
inline constexpr double kXMax = 128.0 * std::numbers::pi;

// Limit estimation and verdicts
inline constexpr double kWindowFrac = 0.25;
inline constexpr double kBandTol = 0.05;
inline constexpr double kValueTol = 0.05;
inline constexpr std::size_t kMinWindowSamples = 16;

// Convolution: trunc_mass_bound may not exceed this fraction of the tilted total.
inline constexpr double kTruncCap = 0.25;

// Transform zero search
inline constexpr double kZeroTol = 1e-3;
inline constexpr double kZStep = 0.01;

// Counterexample pass thresholds
inline constexpr double kMomentRelTol = 1e-6;
inline constexpr double kMomentQuadRelTol = 1e-3;
inline constexpr double kTransformZeroRelTol = 1e-4;
inline constexpr double kZeroLocationTol = 0.01;
inline constexpr double kLatticeRelTol = 0.02;
inline constexpr double kLatticeMinSpread = 0.5;
inline constexpr std::size_t kLatticeMaxIndex = 1000;
inline constexpr double kTwoFoldRelTol = 0.10;
inline constexpr double kFourFoldRelTol = 0.10;
inline constexpr double kLambdaSpreadTol = 0.03;
inline constexpr double kRootBandRelTol = 0.10;
inline constexpr double kRootCollapseRelTol = 0.02;
inline constexpr double kEnvelopeLo = 1.0;
inline constexpr double kEnvelopeHi = 16.0;

} // namespace tiltgrid::defaults
