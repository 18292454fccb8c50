#pragma once

#include <cstddef>
#include <vector>

#include "motorlab/discretize.hpp"
#include "motorlab/model.hpp"

namespace motorlab {

/// Grid samples of the positive densities n_i(x_m).
struct DensityField {
    Grid grid;
    double sigma = 0.0;
    std::vector<std::vector<double>> values;  ///< [i][m]
    Normalization normalization = Normalization::UnitAtOrigin;

    std::size_t species() const noexcept { return values.size(); }
};

/// R_i = -sigma ln n_i and S = -sigma ln sum_i n_i on the grid.
struct PhaseField {
    Grid grid;
    double sigma = 0.0;
    std::vector<std::vector<double>> r;  ///< [i][m]
    std::vector<double> s;
    /// False when an exponent cap was active at convergence.
    bool trusted = true;

    std::size_t species() const noexcept { return r.size(); }
};

/// S = -sigma log sum_i exp(-R_i / sigma), evaluated nodewise without overflow.
std::vector<double> total_phase(const std::vector<std::vector<double>>& r, double sigma);

/// Builds a PhaseField (with S) from phases.
PhaseField make_phase_field(const Grid& grid, double sigma, std::vector<std::vector<double>> r);

/// log sum exp(a_k); -inf for an empty list.
double log_sum_exp(const std::vector<double>& a);

/// Trapezoidal integral of samples on a uniform grid.
double trapezoid(const std::vector<double>& f, double h);

}  // namespace motorlab
