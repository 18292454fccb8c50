#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "motorlab/discretize.hpp"
#include "motorlab/fields.hpp"
#include "motorlab/model.hpp"

namespace motorlab {

/// e^{-R/sigma} is only attempted as a density when the phase range over sigma stays below this.
inline constexpr double kRepresentableExponent = 690.0;

struct NullVectorOptions {
    /// Expected phases R_i (any additive constant) used to scale the unknowns. Empty: built from psi.
    std::vector<std::vector<double>> reference;
    /// Additional solves with the scaling rebuilt from the previous answer.
    int refinement_passes = 1;
    int iterative_refinement_steps = 2;
};

struct NullVectorSolution {
    DensityField density;
    std::vector<std::vector<double>> log_density;  ///< ln n_i, exact even where n_i is tiny
    double residual = 0.0;                         ///< ||A n||_inf / (||A||_inf ||n||_inf)
    bool used_power_iteration = false;
};

/// Positive null vector of `op` by a bordered sparse LU solve on the diagonally scaled operator
/// D^{-1} A D, D = diag(e^{-reference/sigma}). Requires adjoint_consistency(op) <= 1e-10.
NullVectorSolution solve_null_vector_detailed(const SparseOperator& op, Normalization normalization,
                                              const NullVectorOptions& options = {});
DensityField solve_null_vector(const SparseOperator& op, Normalization normalization,
                               const NullVectorOptions& options = {});

/// Nodewise first guess for R_i: psi for one species, otherwise the running sum of the
/// smallest nonnegative potential increment over species.
std::vector<std::vector<double>> default_phase_guess(const Discretization& disc);

/// Implicit Euler on dn/dt = -A n from uniform data, (M + dt A) n^{k+1} = M n^k with M the
/// control-volume weights. Stops when ||n^{k+1} - n^k||_inf / (dt ||n^{k+1}||_inf) <= tol.
DensityField time_march(const ModelConfig& config, const Grid& grid, double sigma, double dt, double tol,
                        std::size_t max_steps);

/// Newton never targets a residual below this many ulps of the system's natural size.
inline constexpr double kRoundingFloorFactor = 32.0;

struct NewtonOptions {
    double tolerance = 1e-9;
    int max_iterations = 100;
    int max_halvings = 20;
    /// Largest change of any R_i(x_m) per iteration, in units of sigma.
    double max_update = 4.0;
};

struct NewtonStats {
    int iterations = 0;
    double residual = 0.0;
    bool capped = false;
    /// Stopping threshold actually used: max(options.tolerance, rounding floor).
    double tolerance = 0.0;
};

/// Newton on the flux form of the phase system (see evaluate_flux_form), warm-started from `init`.
/// The phase at the warm start's global minimum is pinned during the iteration; afterwards a
/// common shift enforces the config's normalization.
PhaseField solve_phase_newton(const ModelConfig& config, const Grid& grid, double sigma, const PhaseField& init,
                              const NewtonOptions& options = {}, NewtonStats* stats = nullptr);
PhaseField solve_phase_newton(const Discretization& disc, Normalization normalization,
                              const std::vector<std::vector<double>>& init, const NewtonOptions& options = {},
                              NewtonStats* stats = nullptr);

struct SweepEntry {
    double sigma = 0.0;
    std::optional<DensityField> density;  ///< absent when e^{-R/sigma} is not representable
    PhaseField phase;
    std::string path;  ///< "density" or "phase"
    double residual = 0.0;  ///< null-vector residual, or the phase Newton residual once Newton has run
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    std::optional<std::string> failure;
    double failed_sigma = 0.0;

    bool complete() const noexcept { return !failure.has_value(); }
};

struct SweepOptions {
    NewtonOptions newton;
    /// Geometric bisections of a sigma step allowed when Newton fails from the previous sigma.
    int max_substeps = 8;
};

/// Solves every sigma in order (strictly descending), each warm-started from the one before.
/// A failure stops the sweep and is recorded next to the completed prefix.
SweepResult continuation_sweep(const ModelConfig& config, const Grid& grid, const std::vector<double>& sigmas,
                               const SweepOptions& options = {});

/// Single solve at `sigma`, reaching it by continuation from 0.05 when sigma is smaller.
SweepEntry solve_steady(const ModelConfig& config, const Grid& grid, double sigma, const SweepOptions& options = {});

}  // namespace motorlab
