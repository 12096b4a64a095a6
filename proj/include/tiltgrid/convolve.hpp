#pragma once

// Convolution of tilted representations. Everything happens on tilted cell
// masses, so tails of size e^{-400} never have to be formed.

#include <vector>

#include "tiltgrid/defaults.hpp"
#include "tiltgrid/dist_core.hpp"

namespace tiltgrid {

/// Tilted cell masses of a rep: masses[j] is e^{gamma0 u} mu(du) over the cell
/// (x_j, x_{j+1}], placed at the cell midpoint.
struct TiltedMassVector {
    double gamma0 = 0.0;
    double step = 0.0;
    double x_lo = 0.0;
    std::vector<double> masses;
    double atom_at_lo = 0.0;
    /// e^{gamma0 x_max} tail(x_max): the mass beyond the grid, carried as an atom just past x_max.
    double beyond = 0.0;
    double trunc_mass_bound = 0.0;

    double total() const;
};

TiltedMassVector to_masses(const GriddedTiltRep& rep);

/// Linear convolution of two nonnegative sequences (FFT, zero padded).
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

/// Rep of A*B on the grid x_lo = x_lo(A) + x_lo(B) with the operands' node count.
/// Throws ConfigError on grid mismatch, NumericalError when the composed
/// truncation bound exceeds trunc_cap times the tilted total.
GriddedTiltRep conv(const GriddedTiltRep& a, const GriddedTiltRep& b, double trunc_cap = defaults::kTruncCap);

/// mu^{n*} by binary powering (n = 4 is conv(mu^{2*}, mu^{2*})).
GriddedTiltRep conv_pow(const GriddedTiltRep& rep, int n, double trunc_cap = defaults::kTruncCap);

} // namespace tiltgrid
