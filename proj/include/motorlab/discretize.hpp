#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "motorlab/model.hpp"

namespace motorlab {

/// Uniform grid on [0, 1] with nodes x_m = m / N.
struct Grid {
    std::size_t cells = 0;
    double h = 0.0;
    std::vector<double> nodes;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Throws InputError for cells < 4.
Grid build_grid(std::size_t cells);

/// B(t) = t / (e^t - 1), B(0) = 1, evaluated without cancellation or overflow.
double bernoulli(double t);

/// Everything the finite-volume scheme needs at the nodes of one (config, grid, sigma).
struct Discretization {
    Grid grid;
    double sigma = 0.0;
    Regime regime = Regime::Bounded;
    std::size_t species = 0;
    /// Multiplies every transition rate in the balance: 1, or 1/sigma in the strong regime.
    double coupling_scale = 1.0;
    /// psi_i(x_m), indexed [i][m].
    std::vector<std::vector<double>> potential;
    /// (psi_i(x_{m+1}) - psi_i(x_m)) / sigma, indexed [i][m], m < N.
    std::vector<std::vector<double>> drift_exponent;
    /// nu_ij(x_m) without the coupling scale, indexed [i * I + j][m].
    std::vector<std::vector<double>> rates;
    /// Control-volume weights in units of h: 1/2 at the two boundary nodes, 1 inside.
    std::vector<double> weights;

    std::size_t index(std::size_t i, std::size_t m) const noexcept { return i * grid.size() + m; }
    std::size_t dimension() const noexcept { return species * grid.size(); }
    double rate(std::size_t i, std::size_t j, std::size_t m) const { return rates[i * species + j][m]; }
};

Discretization discretize(const ModelConfig& config, const Grid& grid, double sigma);

/// Finite-volume operator of the stationary system. Row (i, m) is
///   (F_{i,m+1/2} - F_{i,m-1/2}) / h + w_m c (nu_ii n_i - sum_{j != i} nu_ij n_j)
/// with exponentially fitted fluxes F_{m+1/2} = (sigma/h) [B(t) n_m - B(-t) n_{m+1}],
/// t = (psi(x_{m+1}) - psi(x_m)) / sigma, and zero flux through x = 0 and x = 1.
struct SparseOperator {
    Discretization disc;
    Eigen::SparseMatrix<double> matrix;
    std::string scheme = "scharfetter-gummel-fv";

    std::size_t dimension() const noexcept { return disc.dimension(); }
    double sigma() const noexcept { return disc.sigma; }
};

SparseOperator assemble_operator(const ModelConfig& config, const Grid& grid, double sigma);
SparseOperator assemble_operator(Discretization disc);

/// max |A^T 1| / max |A_ij|.
double adjoint_consistency(const SparseOperator& op);

/// Plain-text "row col value" triplets, one per line, 17 significant digits.
void dump_triplets(const SparseOperator& op, std::ostream& out);

// ---------------------------------------------------------------------------
// Phase form of the same scheme
// ---------------------------------------------------------------------------

/// Exponent cap used by every exponential of the phase system.
inline constexpr double kExponentCap = 700.0;

/// Residual of the scheme rewritten for R_i = -sigma ln n_i: row (i, m) divided by
/// n_{i,m} and multiplied by -sigma,
///   G = -(sigma/h)^2 (P_m - Q_{m-1}) - sigma w_m c nu_ii + sigma w_m c sum_{j!=i} nu_ij e^{(R_i - R_j)/sigma},
/// a consistent discretization of
///   -sigma R'' + (R')^2 - psi' R' + sigma sum_{j!=i} nu_ij e^{(R_i-R_j)/sigma} = sigma (nu_ii - psi'').
/// Boundary rows carry the zero-flux condition, which reduces to R' = psi' as h -> 0.
struct PhaseSystemEval {
    std::vector<double> residual;  ///< flat, index(i, m)
    bool capped = false;           ///< some exponent hit kExponentCap
};

/// r is flat, index(i, m). When `jacobian` is non-null it receives dG/dR.
PhaseSystemEval evaluate_phase_system(const Discretization& disc, const std::vector<double>& r,
                                      Eigen::SparseMatrix<double>* jacobian = nullptr);

/// The same unknowns with rows (I, m), m < N, of the last species replaced by the total flux
/// through x_{m+1/2}, scaled like a boundary row. Summing the balance rows of nodes 0..m gives
/// that flux, so both forms share their solutions, but here the total flux vanishes to rounding
/// relative to its local terms even where the densities are e^{-barrier/sigma} below their peak.
/// Row (I, N) is then implied by the others. Each flux row is divided by the density of the
/// unknown with the smallest phase at its interface, chosen from `reference` when given (a line
/// search compares trials under one scaling), else from r.
PhaseSystemEval evaluate_flux_form(const Discretization& disc, const std::vector<double>& r,
                                   Eigen::SparseMatrix<double>* jacobian = nullptr,
                                   const std::vector<double>* reference = nullptr);

/// Magnitude used to make phase residuals dimensionless: max((sigma/h)^2, sigma c max nu, 1).
double phase_residual_scale(const Discretization& disc);

/// Discrete total flux sum_i F_{i,m+1/2} evaluated from phases, relative to the size of
/// the cancelling terms at that interface. Returns one value per interface.
std::vector<double> total_flux_defect(const Discretization& disc, const std::vector<std::vector<double>>& r);

}  // namespace motorlab
