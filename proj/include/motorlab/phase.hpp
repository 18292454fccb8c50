#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "motorlab/fields.hpp"
#include "motorlab/model.hpp"

namespace motorlab {

/// Densities below this are rejected by to_phase rather than clamped.
inline constexpr double kDensityFloor = 1e-300;

/// R_i = -sigma ln n_i, S = -sigma ln sum_i n_i. Throws InputError naming the first node
/// whose density is not finite or below kDensityFloor.
PhaseField to_phase(const DensityField& density);

/// Discrete slope of S across each interface against the slopes of psi at the interface midpoint.
struct BoundReport {
    std::vector<double> midpoints;
    std::vector<double> slope;  ///< (S_{m+1} - S_m) / h
    std::vector<double> lower;  ///< min_i psi_i'(x_{m+1/2})
    std::vector<double> upper;  ///< max_i psi_i'(x_{m+1/2})
    std::vector<double> slack;  ///< 5 h Lip(psi') over the neighbouring cells
    std::vector<std::size_t> violations;
    double worst_excess = 0.0;  ///< largest distance outside [lower - slack, upper + slack]; <= 0 when clean

    bool ok() const noexcept { return violations.empty(); }
};

BoundReport check_flux_bounds(const PhaseField& phase, const PotentialSet& pot);

struct GapEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double integral = 0.0;  ///< trapezoidal int (R_i - R_j)^2
    double max_abs = 0.0;
};

struct GapReport {
    std::vector<GapEntry> pairs;  ///< i < j, lexicographic
};

GapReport pairwise_gap(const PhaseField& phase);

struct PhaseResidual {
    std::vector<std::vector<double>> values;  ///< [i][m], raw residual of the phase system
    double max_interior = 0.0;
    double max_all = 0.0;
    double scale = 1.0;  ///< see phase_residual_scale
    bool capped = false;
};

/// Residual of the discrete phase system at every node, for phases from any source.
PhaseResidual phase_residual(const PhaseField& phase, const ModelConfig& config);

/// Nodewise derivative: centered inside, one-sided second order at the two ends.
std::vector<double> grid_derivative(const std::vector<double>& f, double h);

struct GradientBound {
    std::vector<double> max_gradient;  ///< per species, max_m |DR_i|
    std::vector<double> bound;         ///< per species, slack included
    bool holds = true;
};

/// max |DR_i| <= 1.1 (max|psi_i'| + sqrt(sigma max|c nu_ii - psi_i''|)) + h max|psi_i''|,
/// c the regime's coupling scale.
GradientBound check_gradient_bound(const PhaseField& phase, const ModelConfig& config);

/// Largest violation of S <= min_i R_i <= S + sigma ln I over the grid; <= 0 when it holds.
double sandwich_defect(const PhaseField& phase);

}  // namespace motorlab
