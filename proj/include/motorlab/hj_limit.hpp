#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "motorlab/discretize.hpp"
#include "motorlab/fields.hpp"
#include "motorlab/model.hpp"

namespace motorlab {

/// Which formula produced the limit slope at a node.
enum class Branch { MinPlus, MaxNeg, Zero, StrongRoot, VanishingBound };

std::string to_string(Branch branch);

/// Limit phase R with R(0) = 0, its slope and a branch label per node.
struct LimitProfile {
    Grid grid;
    std::vector<double> r;
    std::vector<double> slope;
    std::vector<Branch> labels;
    std::string theorem;  ///< "min-plus", "piecewise" or "strong"
};

/// R' = max(min_i psi_i', 0). Requires certificate.min_plus_limit.
/// R is integrated from the exact slope (3-point Gauss per cell, cells split at sign changes).
LimitProfile limit_bounded(const PotentialSet& pot, const Grid& grid, const AssumptionReport& certificate);

/// Three-branch slope: min_i (psi_i')_+ on J, max_i psi_i' on K, 0 elsewhere. A node on a
/// junction takes the label of the interval to its right. Requires certificate.piecewise_limit.
LimitProfile limit_piecewise(const PotentialSet& pot, const RegionDecomposition& regions, const Grid& grid,
                             const AssumptionReport& certificate);

// ---------------------------------------------------------------------------
// Two-species strong coupling
// ---------------------------------------------------------------------------

/// psi_1'(x), psi_2'(x) and the loss rates nu_1 = nu_21, nu_2 = nu_12 at one point.
struct HamiltonianParams {
    double psi1_slope = 0.0;
    double psi2_slope = 0.0;
    double nu1 = 1.0;
    double nu2 = 1.0;
};

/// H(p) = 1/2 [b1 + b2 + sqrt((b1 + b2)^2 - 4 (b1 b2 - nu1 nu2))], b_i = p^2 - psi_i' p - nu_i.
/// Evaluated in a form that returns exactly 0 at p = 0.
double effective_hamiltonian(double p, const HamiltonianParams& params);

/// Upper bound on |dH/dp| over [p - radius, p + radius].
double hamiltonian_lipschitz(double p, double radius, const HamiltonianParams& params);

/// Sorted real p with (p^2 - psi1' p - nu1)(p^2 - psi2' p - nu2) = nu1 nu2 and b1 + b2 <= 0.
/// Always contains 0.
std::vector<double> solve_ham_roots(const HamiltonianParams& params);

HamiltonianParams hamiltonian_params(const ModelConfig& config, double x);

/// Per-node lower bounds of the strong-coupling limit checked against a slope array.
struct BoundCertificate {
    double k = 0.0;
    std::vector<double> required;  ///< min_i psi_i' on J, -sqrt(k) elsewhere
    std::vector<double> margin;    ///< slope - required
    std::vector<std::size_t> violations;
    /// max over species with psi_i' > 0 of (psi_i' - sqrt(psi_i'^2 + 4 nu_i)) / 2; NaN where none.
    std::vector<double> display_bound;
    std::vector<std::size_t> display_violations;
    /// Nodes with some psi_i' > 0 where slope < +sqrt(nu_i), the literal last inequality of the
    /// argument. Informational only: that inequality cannot hold with the sign as printed.
    std::size_t literal_display_failures = 0;

    bool ok() const noexcept { return violations.empty() && display_violations.empty(); }
};

struct StrongLimit {
    LimitProfile profile;
    BoundCertificate certificate;
};

/// Slope chosen among solve_ham_roots: roots meeting the lower bound of the node's region,
/// then the one closest to the previous node's slope (smallest magnitude at x = 0).
/// Throws UnsupportedConfigError unless the config is strong with two species.
StrongLimit limit_strong(const ModelConfig& config, const RegionDecomposition& regions, const Grid& grid);

/// Lower bounds of the strong limit for slopes sampled at the grid nodes; `tol` is subtracted
/// from every bound.
BoundCertificate certify_strong_slopes(const ModelConfig& config, const RegionDecomposition& regions,
                                       const Grid& grid, const std::vector<double>& slope, double tol = 0.0);

// ---------------------------------------------------------------------------
// Vanishing coupling
// ---------------------------------------------------------------------------

/// lower[m] <= R_i'(x_m) <= upper[m]; infinite entries mean no constraint.
struct SignConstraint {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> negative_set;  ///< x_m inside some interval where psi_i' < 0
};

struct VanishingBounds {
    Grid grid;
    std::vector<SignConstraint> species;
    /// min_i psi_i' on J (target for the slope of min_i R_i), NaN off J.
    std::vector<double> j_target;
};

/// Lower slope bounds for each species: R_i' >= 0 off the intervals where psi_i' < 0 and
/// R_i' >= psi_i' on them; no upper bounds are imposed.
/// Throws InputError for a non-vanishing regime or when the coupling assumption fails.
VanishingBounds limit_vanishing_bounds(const ModelConfig& config, const Grid& grid);

struct VanishingCheck {
    std::vector<double> worst_excess;  ///< per species; <= 0 when all constraints hold
    std::vector<std::size_t> violation_counts;  ///< per species
    double j_deviation = 0.0;  ///< max |D(min_i R_i) - target| on J
    bool ok() const noexcept;
};

/// Applies the constraints to computed phases with derivative tolerance `tol`.
VanishingCheck check_vanishing(const PhaseField& phase, const VanishingBounds& bounds, double tol);

// ---------------------------------------------------------------------------

struct HjResidual {
    std::vector<double> values;  ///< |R'|^2 + max_i(-psi_i' R') at each node
    double max_interior = 0.0;   ///< nodes whose neighbours carry the same label
    double max_junction = 0.0;   ///< nodes next to a label change
    double max_all = 0.0;
};

HjResidual hj_residual(const LimitProfile& profile, const PotentialSet& pot);

}  // namespace motorlab
