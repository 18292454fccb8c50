#include "motorlab/steady_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>

#include "motorlab/errors.hpp"

namespace motorlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kDensityFloorLog = -690.7755278982137;  // ln 1e-300

std::string node_name(const Discretization& disc, std::size_t k) {
    const std::size_t i = k / disc.grid.size();
    const std::size_t m = k % disc.grid.size();
    std::ostringstream out;
    out << "species " << i << ", node " << m << " (x = " << disc.grid.nodes[m] << ")";
    return out.str();
}

double clamp_exp(double a) { return std::exp(std::clamp(a, -kExponentCap, kExponentCap)); }

std::vector<double> flatten(const std::vector<std::vector<double>>& f) {
    std::vector<double> out;
    for (const auto& row : f) out.insert(out.end(), row.begin(), row.end());
    return out;
}

std::vector<std::vector<double>> unflatten(const std::vector<double>& f, std::size_t species, std::size_t nodes) {
    std::vector<std::vector<double>> out(species, std::vector<double>(nodes));
    for (std::size_t i = 0; i < species; ++i)
        std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(i * nodes), nodes, out[i].begin());
    return out;
}

// Additive constant c such that the densities exp(log_n + c) satisfy the normalization.
double normalization_shift(const Discretization& disc, const std::vector<std::vector<double>>& log_n,
                           Normalization normalization) {
    std::vector<double> terms;
    if (normalization == Normalization::UnitAtOrigin) {
        for (const auto& row : log_n) terms.push_back(row.front());
    } else {
        const double logh = std::log(disc.grid.h);
        for (const auto& row : log_n)
            for (std::size_t m = 0; m < row.size(); ++m) terms.push_back(row[m] + logh + std::log(disc.weights[m]));
    }
    return -log_sum_exp(terms);
}

double row_norm_inf(const SpMat& a) {
    Vec sums = Vec::Zero(a.rows());
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
        for (SpMat::InnerIterator it(a, c); it; ++it) sums[it.row()] += std::abs(it.value());
    return sums.maxCoeff();
}

struct ScaledSolve {
    Vec u;
    bool power_iteration = false;
};

// Solves D^{-1} A D u = 0 with u(anchor) = 1.
ScaledSolve solve_scaled(const SparseOperator& op, const std::vector<double>& phi, int refinement_steps) {
    const auto& a = op.matrix;
    const double sigma = op.sigma();
    const auto dim = a.rows();
    const auto anchor = static_cast<Eigen::Index>(std::min_element(phi.begin(), phi.end()) - phi.begin());

    std::vector<Eigen::Triplet<double>> full, bordered;
    full.reserve(static_cast<std::size_t>(a.nonZeros()));
    bordered.reserve(static_cast<std::size_t>(a.nonZeros()) + 1);
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        for (SpMat::InnerIterator it(a, c); it; ++it) {
            const double v = it.value() * clamp_exp((phi[static_cast<std::size_t>(it.row())] - phi[static_cast<std::size_t>(c)]) / sigma);
            full.emplace_back(static_cast<int>(it.row()), static_cast<int>(c), v);
            if (it.row() != anchor) bordered.emplace_back(static_cast<int>(it.row()), static_cast<int>(c), v);
        }
    }
    bordered.emplace_back(static_cast<int>(anchor), static_cast<int>(anchor), 1.0);
    SpMat b(dim, dim);
    b.setFromTriplets(bordered.begin(), bordered.end());
    b.makeCompressed();

    Vec rhs = Vec::Zero(dim);
    rhs[anchor] = 1.0;

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(b);
    if (lu.info() == Eigen::Success) {
        Vec u = lu.solve(rhs);
        for (int k = 0; k < refinement_steps && lu.info() == Eigen::Success; ++k) u += lu.solve(rhs - b * u);
        if (lu.info() == Eigen::Success && u.allFinite()) return {u, false};
    }

    // Inverse power iteration on a slightly shifted, unbordered operator.
    SpMat f(dim, dim);
    f.setFromTriplets(full.begin(), full.end());
    const double shift = 1e-10 * row_norm_inf(f);
    SpMat shifted = f;
    for (Eigen::Index k = 0; k < dim; ++k) shifted.coeffRef(k, k) += shift;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw SolverError("singular bordered system and shifted operator");
    Vec y = Vec::Ones(dim);
    for (int it = 0; it < 200; ++it) {
        Vec next = lu.solve(y);
        if (lu.info() != Eigen::Success || !next.allFinite()) throw SolverError("inverse power iteration failed");
        next /= next[anchor];
        const double change = (next - y).cwiseAbs().maxCoeff();
        y = next;
        if (change <= 1e-14 * y.cwiseAbs().maxCoeff()) break;
    }
    return {y, true};
}

}  // namespace

std::vector<std::vector<double>> default_phase_guess(const Discretization& disc) {
    const std::size_t nodes = disc.grid.size();
    std::vector<std::vector<double>> phi(disc.species, std::vector<double>(nodes, 0.0));
    if (disc.species == 1) {
        for (std::size_t m = 0; m < nodes; ++m) phi[0][m] = disc.potential[0][m] - disc.potential[0][0];
        return phi;
    }
    std::vector<double> common(nodes, 0.0);
    for (std::size_t m = 0; m + 1 < nodes; ++m) {
        double step = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < disc.species; ++i)
            step = std::min(step, disc.potential[i][m + 1] - disc.potential[i][m]);
        common[m + 1] = common[m] + std::max(step, 0.0);
    }
    for (auto& row : phi) row = common;
    return phi;
}

NullVectorSolution solve_null_vector_detailed(const SparseOperator& op, Normalization normalization,
                                              const NullVectorOptions& options) {
    const auto& disc = op.disc;
    if (adjoint_consistency(op) > 1e-10) throw InputError("operator fails the adjoint consistency check");
    const double sigma = disc.sigma;
    const std::size_t nodes = disc.grid.size();

    std::vector<double> phi = flatten(options.reference.empty() ? default_phase_guess(disc) : options.reference);
    if (phi.size() != disc.dimension()) throw InputError("reference phase does not match the operator");

    ScaledSolve solved;
    for (int pass = 0;; ++pass) {
        solved = solve_scaled(op, phi, options.iterative_refinement_steps);
        for (Eigen::Index k = 0; k < solved.u.size(); ++k) {
            if (!(solved.u[k] > 0.0))
                throw SolverError("null vector has a nonpositive entry at " + node_name(disc, static_cast<std::size_t>(k)));
        }
        if (pass >= options.refinement_passes) break;
        for (std::size_t k = 0; k < phi.size(); ++k) phi[k] -= sigma * std::log(solved.u[static_cast<Eigen::Index>(k)]);
    }

    std::vector<double> log_flat(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k)
        log_flat[k] = -phi[k] / sigma + std::log(solved.u[static_cast<Eigen::Index>(k)]);
    auto log_n = unflatten(log_flat, disc.species, nodes);
    const double c = normalization_shift(disc, log_n, normalization);
    for (auto& row : log_n)
        for (double& v : row) v += c;

    NullVectorSolution out;
    out.used_power_iteration = solved.power_iteration;
    out.density.grid = disc.grid;
    out.density.sigma = sigma;
    out.density.normalization = normalization;
    out.density.values.assign(disc.species, std::vector<double>(nodes));
    for (std::size_t i = 0; i < disc.species; ++i) {
        for (std::size_t m = 0; m < nodes; ++m) {
            if (log_n[i][m] < kDensityFloorLog)
                throw SolverError("density underflows below 1e-300 at " + node_name(disc, i * nodes + m) +
                                  "; use the phase path");
            out.density.values[i][m] = std::exp(log_n[i][m]);
        }
    }
    out.log_density = std::move(log_n);

    Vec n(static_cast<Eigen::Index>(disc.dimension()));
    for (std::size_t i = 0; i < disc.species; ++i)
        for (std::size_t m = 0; m < nodes; ++m) n[static_cast<Eigen::Index>(i * nodes + m)] = out.density.values[i][m];
    const double nmax = n.cwiseAbs().maxCoeff();
    out.residual = (op.matrix * n).cwiseAbs().maxCoeff() / (row_norm_inf(op.matrix) * nmax);
    if (out.residual > 1e-10) {
        std::ostringstream msg;
        msg << "null vector residual " << out.residual << " exceeds 1e-10";
        throw SolverError(msg.str());
    }
    return out;
}

DensityField solve_null_vector(const SparseOperator& op, Normalization normalization, const NullVectorOptions& options) {
    return solve_null_vector_detailed(op, normalization, options).density;
}

// ---------------------------------------------------------------------------

DensityField time_march(const ModelConfig& config, const Grid& grid, double sigma, double dt, double tol,
                        std::size_t max_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("time step must be > 0");
    if (!(tol > 0.0)) throw InputError("tolerance must be > 0");
    const auto op = assemble_operator(config, grid, sigma);
    const auto& disc = op.disc;
    const std::size_t nodes = grid.size();
    const auto dim = static_cast<Eigen::Index>(disc.dimension());

    double max_diag = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) max_diag = std::max(max_diag, std::abs(op.matrix.coeff(k, k)));
    // Beyond ~1e12 the mass matrix is lost in rounding next to dt*A and the increment test is meaningless.
    const double stiffness = dt * max_diag / 0.5;
    if (stiffness > 1e12) {
        std::ostringstream msg;
        msg << "time step " << dt << " fails the implicit Euler solvability check (dt*max|A_ii|/min w = " << stiffness
            << " > 1e12)";
        throw InputError(msg.str());
    }

    Vec mass(dim);
    for (std::size_t i = 0; i < disc.species; ++i)
        for (std::size_t m = 0; m < nodes; ++m) mass[static_cast<Eigen::Index>(i * nodes + m)] = disc.weights[m];
    SpMat system = op.matrix * dt;
    for (Eigen::Index k = 0; k < dim; ++k) system.coeffRef(k, k) += mass[k];
    system.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success) throw SolverError("implicit Euler matrix is singular");

    Vec n = Vec::Ones(dim);
    double increment = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < max_steps; ++step) {
        Vec next = lu.solve(mass.cwiseProduct(n));
        if (lu.info() != Eigen::Success || !next.allFinite()) throw SolverError("implicit Euler solve failed");
        increment = (next - n).cwiseAbs().maxCoeff() / (dt * next.cwiseAbs().maxCoeff());
        n = next;
        if (increment <= tol) {
            std::vector<std::vector<double>> log_n(disc.species, std::vector<double>(nodes));
            for (std::size_t i = 0; i < disc.species; ++i) {
                for (std::size_t m = 0; m < nodes; ++m) {
                    const double v = n[static_cast<Eigen::Index>(i * nodes + m)];
                    if (!(v > 0.0)) throw SolverError("time march produced a nonpositive density at " + node_name(disc, i * nodes + m));
                    log_n[i][m] = std::log(v);
                }
            }
            const double c = std::exp(normalization_shift(disc, log_n, config.normalization));
            DensityField out;
            out.grid = grid;
            out.sigma = sigma;
            out.normalization = config.normalization;
            out.values.assign(disc.species, std::vector<double>(nodes));
            for (std::size_t i = 0; i < disc.species; ++i)
                for (std::size_t m = 0; m < nodes; ++m) out.values[i][m] = c * n[static_cast<Eigen::Index>(i * nodes + m)];
            return out;
        }
    }
    throw NonConvergenceError("time march did not reach the steady state within max_steps", increment);
}

// ---------------------------------------------------------------------------

PhaseField solve_phase_newton(const ModelConfig& config, const Grid& grid, double sigma, const PhaseField& init,
                              const NewtonOptions& options, NewtonStats* stats) {
    return solve_phase_newton(discretize(config, grid, sigma), config.normalization, init.r, options, stats);
}

PhaseField solve_phase_newton(const Discretization& disc, Normalization normalization,
                              const std::vector<std::vector<double>>& init, const NewtonOptions& options,
                              NewtonStats* stats) {
    const double sigma = disc.sigma;
    const std::size_t nodes = disc.grid.size();
    if (init.size() != disc.species) throw InputError("initial phase has the wrong number of species");
    for (const auto& row : init) {
        if (row.size() != nodes) throw InputError("initial phase does not match the grid");
        for (double v : row)
            if (!std::isfinite(v)) throw InputError("initial phase is not finite");
    }

    std::vector<double> r = flatten(init);
    const auto anchor = static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
    const auto norm_of = [&](const std::vector<double>& g) {
        double worst = 0.0;
        for (double v : g) worst = std::max(worst, std::abs(v));
        return worst;
    };

    // Flux form: its last balance row is implied by the others, so it carries the pin instead and
    // is left out of the line-search merit.
    const std::size_t implied = disc.index(disc.species - 1, nodes - 1);
    const auto merit_of = [&](const std::vector<double>& g) {
        double worst = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            if (k != implied) worst = std::max(worst, std::abs(g[k]));
        return worst;
    };

    SpMat jac;
    auto eval = evaluate_flux_form(disc, r, &jac);
    double residual = norm_of(eval.residual);
    double merit = merit_of(eval.residual);
    // Rounding in R alone perturbs G by about eps * scale * |R| / sigma, which at small sigma on
    // fine grids exceeds the requested tolerance; never ask for less than a small multiple of it.
    const double scale = phase_residual_scale(disc);
    const auto target = [&] {
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        const double magnitude = std::max(std::abs(*lo), std::abs(*hi)) / sigma;
        return std::max(options.tolerance,
                        kRoundingFloorFactor * std::numeric_limits<double>::epsilon() * scale * (1.0 + magnitude));
    };
    double tolerance = target();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    int iteration = 0;
    while (residual > tolerance) {
        if (iteration >= options.max_iterations)
            throw NonConvergenceError("phase Newton did not converge; continue in sigma from a larger value", residual);
        ++iteration;

        // The implied row becomes the pin dR_anchor = 0, which also removes the shift invariance.
        for (Eigen::Index c = 0; c < jac.outerSize(); ++c)
            for (SpMat::InnerIterator it(jac, c); it; ++it)
                if (static_cast<std::size_t>(it.row()) == implied) it.valueRef() = 0.0;
        jac.coeffRef(static_cast<Eigen::Index>(implied), static_cast<Eigen::Index>(anchor)) = 1.0;
        jac.makeCompressed();
        Vec rhs(static_cast<Eigen::Index>(r.size()));
        for (std::size_t k = 0; k < r.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = -eval.residual[k];
        rhs[static_cast<Eigen::Index>(implied)] = 0.0;
        if (!analyzed) {
            lu.analyzePattern(jac);
            analyzed = true;
        }
        lu.factorize(jac);
        if (lu.info() != Eigen::Success)
            throw NonConvergenceError("phase Newton: singular Jacobian; continue in sigma from a larger value", residual);
        const Vec step = lu.solve(rhs);
        if (!step.allFinite())
            throw NonConvergenceError("phase Newton: non-finite step; continue in sigma from a larger value", residual);

        // Near-null modes (valleys joined only through e^{-barrier/sigma}) give huge linear steps
        // that the exponential system does not honor; when the full step fails, limit the update
        // to a few sigma. Smooth long-range corrections are honored and pass in full.
        const double largest = step.cwiseAbs().maxCoeff();
        const double capped = std::min(1.0, options.max_update * sigma / std::max(largest, 1e-300));
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = -1; halving <= options.max_halvings; ++halving) {
            if (halving == 0) lambda = capped;
            else if (halving > 0) lambda *= 0.5;
            if (halving == 0 && capped == 1.0) continue;
            std::vector<double> trial(r);
            for (std::size_t k = 0; k < r.size(); ++k) trial[k] += lambda * step[static_cast<Eigen::Index>(k)];
            const auto trial_eval = evaluate_flux_form(disc, trial, nullptr, &r);
            const double trial_merit = merit_of(trial_eval.residual);
            if (std::isfinite(trial_merit) && trial_merit <= (1.0 - 1e-4 * lambda) * merit) {
                r = std::move(trial);
                eval = evaluate_flux_form(disc, r, &jac);
                merit = merit_of(eval.residual);
                residual = norm_of(eval.residual);
                tolerance = target();
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NonConvergenceError("phase Newton: line search failed; continue in sigma from a larger value", residual);
    }

    auto phases = unflatten(r, disc.species, nodes);
    std::vector<std::vector<double>> log_n(disc.species, std::vector<double>(nodes));
    for (std::size_t i = 0; i < disc.species; ++i)
        for (std::size_t m = 0; m < nodes; ++m) log_n[i][m] = -phases[i][m] / sigma;
    const double shift = -sigma * normalization_shift(disc, log_n, normalization);
    for (auto& row : phases)
        for (double& v : row) v += shift;

    PhaseField out = make_phase_field(disc.grid, sigma, std::move(phases));
    out.trusted = !eval.capped;
    if (stats) {
        stats->iterations = iteration;
        stats->residual = residual;
        stats->capped = eval.capped;
        stats->tolerance = tolerance;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double phase_range(const std::vector<std::vector<double>>& r) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : r)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return hi - lo;
}

SweepEntry from_density(const NullVectorSolution& sol, double sigma) {
    SweepEntry e;
    e.sigma = sigma;
    e.path = "density";
    e.residual = sol.residual;
    std::vector<std::vector<double>> r = sol.log_density;
    for (auto& row : r)
        for (double& v : row) v *= -sigma;
    e.phase = make_phase_field(sol.density.grid, sigma, std::move(r));
    e.density = sol.density;
    return e;
}

// The null vector is accurate relative to its largest entry only; across a barrier the
// densities sit e^{-barrier/sigma} below it and carry a spurious net flux. A few Newton steps on
// the flux form make every interface balance to rounding. Kept unpolished if Newton fails.
SweepEntry polished(SweepEntry e, const Discretization& disc, Normalization normalization,
                    const NewtonOptions& options) {
    try {
        NewtonStats stats;
        auto phase = solve_phase_newton(disc, normalization, e.phase.r, options, &stats);
        if (stats.iterations == 0 || !phase.trusted) return e;
        for (std::size_t i = 0; i < phase.species(); ++i)
            for (std::size_t m = 0; m < phase.grid.size(); ++m)
                e.density->values[i][m] = std::exp(-phase.r[i][m] / e.sigma);
        e.phase = std::move(phase);
        e.residual = stats.residual;
    } catch (const NonConvergenceError&) {
    }
    return e;
}

// One solve at sigma, warm-started from `previous` (phases at a larger sigma) when given.
SweepEntry solve_one(const ModelConfig& config, const Grid& grid, double sigma, const PhaseField* previous,
                     const SweepOptions& options, int depth) {
    const auto op = assemble_operator(config, grid, sigma);
    const auto guess = previous ? previous->r : default_phase_guess(op.disc);
    std::string density_failure;
    if (phase_range(guess) / sigma <= kRepresentableExponent) {
        try {
            NullVectorOptions nv;
            nv.reference = guess;
            return polished(from_density(solve_null_vector_detailed(op, config.normalization, nv), sigma), op.disc,
                            config.normalization, options.newton);
        } catch (const SolverError& e) {
            density_failure = e.what();
        }
    }
    try {
        NewtonStats stats;
        SweepEntry e;
        e.sigma = sigma;
        e.path = "phase";
        e.phase = solve_phase_newton(op.disc, config.normalization, guess, options.newton, &stats);
        e.residual = stats.residual;
        return e;
    } catch (const NonConvergenceError&) {
        if (!previous || depth >= options.max_substeps) throw;
    }
    // Halve the step geometrically and retry.
    const double mid = std::sqrt(previous->sigma * sigma);
    const SweepEntry half = solve_one(config, grid, mid, previous, options, depth + 1);
    return solve_one(config, grid, sigma, &half.phase, options, depth + 1);
}

}  // namespace

SweepResult continuation_sweep(const ModelConfig& config, const Grid& grid, const std::vector<double>& sigmas,
                               const SweepOptions& options) {
    if (sigmas.empty()) throw InputError("sigma list is empty");
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        if (!(sigmas[k] > 0.0) || !std::isfinite(sigmas[k])) throw InputError("every sigma must be > 0");
        if (k > 0 && !(sigmas[k] < sigmas[k - 1])) throw InputError("sigmas must be strictly descending");
    }
    config.check_consistent();

    SweepResult result;
    for (double sigma : sigmas) {
        try {
            const PhaseField* previous = result.entries.empty() ? nullptr : &result.entries.back().phase;
            result.entries.push_back(solve_one(config, grid, sigma, previous, options, 0));
        } catch (const std::runtime_error& e) {
            result.failure = e.what();
            result.failed_sigma = sigma;
            break;
        }
    }
    return result;
}

SweepEntry solve_steady(const ModelConfig& config, const Grid& grid, double sigma, const SweepOptions& options) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be > 0");
    std::vector<double> ladder;
    for (double s = 0.05; s > sigma * 1.5; s *= 0.5) ladder.push_back(s);
    ladder.push_back(sigma);
    const auto sweep = continuation_sweep(config, grid, ladder, options);
    if (!sweep.complete()) {
        std::ostringstream msg;
        msg << "steady solve failed at sigma = " << sweep.failed_sigma << ": " << *sweep.failure;
        throw SolverError(msg.str());
    }
    return sweep.entries.back();
}

}  // namespace motorlab
