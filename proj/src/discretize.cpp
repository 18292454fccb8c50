#include "motorlab/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "motorlab/errors.hpp"

namespace motorlab {

Grid build_grid(std::size_t cells) {
    if (cells < 4) throw InputError("grid needs at least 4 cells");
    Grid g;
    g.cells = cells;
    g.h = 1.0 / static_cast<double>(cells);
    g.nodes.resize(cells + 1);
    for (std::size_t m = 0; m <= cells; ++m) g.nodes[m] = static_cast<double>(m) / static_cast<double>(cells);
    return g;
}

double bernoulli(double t) {
    const double a = std::abs(t);
    if (a < 1e-4) return 1.0 - 0.5 * t + t * t / 12.0;
    if (t > 700.0) return t * std::exp(-t);
    if (t < -700.0) return -t;
    return t / std::expm1(t);
}

Discretization discretize(const ModelConfig& config, const Grid& grid, double sigma) {
    config.check_consistent();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be > 0");
    if (grid.size() < 5) throw InputError("grid needs at least 4 cells");

    Discretization d;
    d.grid = grid;
    d.sigma = sigma;
    d.regime = config.rates.regime();
    d.species = config.species_count();
    d.coupling_scale = d.regime == Regime::Strong ? 1.0 / sigma : 1.0;

    const std::size_t nodes = grid.size();
    d.potential.assign(d.species, std::vector<double>(nodes));
    d.drift_exponent.assign(d.species, std::vector<double>(nodes - 1));
    for (std::size_t i = 0; i < d.species; ++i) {
        for (std::size_t m = 0; m < nodes; ++m) d.potential[i][m] = config.potentials[i].value(grid.nodes[m]);
        for (std::size_t m = 0; m + 1 < nodes; ++m)
            d.drift_exponent[i][m] = (d.potential[i][m + 1] - d.potential[i][m]) / sigma;
    }
    d.rates.assign(d.species * d.species, std::vector<double>(nodes));
    for (std::size_t i = 0; i < d.species; ++i)
        for (std::size_t j = 0; j < d.species; ++j)
            for (std::size_t m = 0; m < nodes; ++m) d.rates[i * d.species + j][m] = config.rates(i, j, grid.nodes[m]);

    d.weights.assign(nodes, 1.0);
    d.weights.front() = 0.5;
    d.weights.back() = 0.5;
    return d;
}

SparseOperator assemble_operator(const ModelConfig& config, const Grid& grid, double sigma) {
    return assemble_operator(discretize(config, grid, sigma));
}

SparseOperator assemble_operator(Discretization disc) {
    const std::size_t nodes = disc.grid.size();
    const std::size_t species = disc.species;
    const double h = disc.grid.h;
    const double diffusion = disc.sigma / (h * h);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(species * nodes * (3 + species) + 4);
    for (std::size_t i = 0; i < species; ++i) {
        for (std::size_t m = 0; m + 1 < nodes; ++m) {
            const double t = disc.drift_exponent[i][m];
            const double down = diffusion * bernoulli(t);  // coefficient of n_m in F_{m+1/2} / h
            const double up = diffusion * bernoulli(-t);   // coefficient of -n_{m+1}
            const auto r0 = static_cast<int>(disc.index(i, m));
            const auto r1 = static_cast<int>(disc.index(i, m + 1));
            triplets.emplace_back(r0, r0, down);
            triplets.emplace_back(r0, r1, -up);
            triplets.emplace_back(r1, r0, -down);
            triplets.emplace_back(r1, r1, up);
        }
        for (std::size_t m = 0; m < nodes; ++m) {
            const double w = disc.weights[m] * disc.coupling_scale;
            const auto row = static_cast<int>(disc.index(i, m));
            for (std::size_t j = 0; j < species; ++j) {
                const double nu = disc.rate(i, j, m);
                if (nu == 0.0) continue;
                if (j == i) triplets.emplace_back(row, row, w * nu);
                else triplets.emplace_back(row, static_cast<int>(disc.index(j, m)), -w * nu);
            }
        }
    }
    SparseOperator op;
    op.matrix.resize(static_cast<Eigen::Index>(disc.dimension()), static_cast<Eigen::Index>(disc.dimension()));
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    op.disc = std::move(disc);
    return op;
}

double adjoint_consistency(const SparseOperator& op) {
    const auto& a = op.matrix;
    double largest = 0.0;
    double worst = 0.0;
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            sum += it.value();
            largest = std::max(largest, std::abs(it.value()));
        }
        worst = std::max(worst, std::abs(sum));
    }
    return largest > 0.0 ? worst / largest : 0.0;
}

void dump_triplets(const SparseOperator& op, std::ostream& out) {
    char buf[96];
    for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, c); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                          static_cast<long long>(it.col()), it.value());
            out << buf;
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

struct CappedExp {
    bool capped = false;
    double operator()(double a) {
        if (a > kExponentCap) {
            capped = true;
            a = kExponentCap;
        }
        return std::exp(a);
    }
};

// B(-t) e^{-d}, arranged so that neither factor overflows.
double e_minus(double t, double d, CappedExp& ex) {
    return t >= 0.0 ? bernoulli(-t) * ex(-d) : bernoulli(t) * ex(t - d);
}

// B(t) e^{d}
double e_plus(double t, double d, CappedExp& ex) {
    return t <= 0.0 ? bernoulli(t) * ex(d) : bernoulli(-t) * ex(d - t);
}

}  // namespace

PhaseSystemEval evaluate_phase_system(const Discretization& disc, const std::vector<double>& r,
                                      Eigen::SparseMatrix<double>* jacobian) {
    const std::size_t nodes = disc.grid.size();
    const std::size_t species = disc.species;
    const double sigma = disc.sigma;
    const double h = disc.grid.h;
    const double outer = sigma * sigma / (h * h);
    const double inner = sigma / (h * h);

    PhaseSystemEval out;
    out.residual.assign(disc.dimension(), 0.0);
    CappedExp ex;
    std::vector<Eigen::Triplet<double>> triplets;
    if (jacobian) triplets.reserve(species * nodes * (3 + species));

    for (std::size_t i = 0; i < species; ++i) {
        const auto& tvec = disc.drift_exponent[i];
        for (std::size_t m = 0; m < nodes; ++m) {
            const std::size_t row = disc.index(i, m);
            double g = 0.0;
            double diag = 0.0;
            if (m + 1 < nodes) {
                const double t = tvec[m];
                const double d = (r[row + 1] - r[row]) / sigma;
                const double em = e_minus(t, d, ex);
                g -= outer * (bernoulli(t) - em);
                diag += inner * em;
                if (jacobian) triplets.emplace_back(static_cast<int>(row), static_cast<int>(row + 1), -inner * em);
            }
            if (m > 0) {
                const double t = tvec[m - 1];
                const double d = (r[row] - r[row - 1]) / sigma;
                const double ep = e_plus(t, d, ex);
                g += outer * (ep - bernoulli(-t));
                diag += inner * ep;
                if (jacobian) triplets.emplace_back(static_cast<int>(row), static_cast<int>(row - 1), -inner * ep);
            }
            const double wc = disc.weights[m] * disc.coupling_scale;
            g -= sigma * wc * disc.rate(i, i, m);
            for (std::size_t j = 0; j < species; ++j) {
                if (j == i) continue;
                const double nu = disc.rate(i, j, m);
                if (nu == 0.0) continue;
                const double e = ex((r[row] - r[disc.index(j, m)]) / sigma);
                g += sigma * wc * nu * e;
                diag += wc * nu * e;
                if (jacobian)
                    triplets.emplace_back(static_cast<int>(row), static_cast<int>(disc.index(j, m)), -wc * nu * e);
            }
            if (jacobian) triplets.emplace_back(static_cast<int>(row), static_cast<int>(row), diag);
            out.residual[row] = g;
        }
    }
    out.capped = ex.capped;
    if (jacobian) {
        jacobian->resize(static_cast<Eigen::Index>(disc.dimension()), static_cast<Eigen::Index>(disc.dimension()));
        jacobian->setFromTriplets(triplets.begin(), triplets.end());
        jacobian->makeCompressed();
    }
    return out;
}

PhaseSystemEval evaluate_flux_form(const Discretization& disc, const std::vector<double>& r,
                                   Eigen::SparseMatrix<double>* jacobian, const std::vector<double>* reference) {
    const std::vector<double>& base = reference ? *reference : r;
    const std::size_t nodes = disc.grid.size();
    const std::size_t last = disc.species - 1;
    const double sigma = disc.sigma;
    const double outer = sigma * sigma / (disc.grid.h * disc.grid.h);
    const double inner = sigma / (disc.grid.h * disc.grid.h);

    Eigen::SparseMatrix<double> balance;
    PhaseSystemEval out = evaluate_phase_system(disc, r, jacobian ? &balance : nullptr);
    std::vector<Eigen::Triplet<double>> triplets;
    if (jacobian) {
        triplets.reserve(static_cast<std::size_t>(balance.nonZeros()) + (2 * disc.species + 1) * nodes);
        for (Eigen::Index c = 0; c < balance.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(balance, c); it; ++it)
                if (static_cast<std::size_t>(it.row()) < disc.index(last, 0) ||
                    static_cast<std::size_t>(it.row()) == disc.index(last, nodes - 1))
                    triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
    CappedExp ex;
    for (std::size_t m = 0; m + 1 < nodes; ++m) {
        // Divide by the density of the least-phase unknown at the interface, like a boundary row
        // divides by n_m; `reference` only picks which unknown that is.
        std::size_t pivot = disc.index(0, m);
        for (std::size_t i = 0; i < disc.species; ++i)
            for (std::size_t k : {disc.index(i, m), disc.index(i, m + 1)})
                if (base[k] < base[pivot]) pivot = k;
        const std::size_t row = disc.index(last, m);
        double total = 0.0;
        for (std::size_t i = 0; i < disc.species; ++i) {
            const double t = disc.drift_exponent[i][m];
            const std::size_t a = disc.index(i, m), b = disc.index(i, m + 1);
            const double left = bernoulli(t) * ex(-(r[a] - r[pivot]) / sigma);
            const double right = bernoulli(-t) * ex(-(r[b] - r[pivot]) / sigma);
            total += left - right;
            if (jacobian) {
                triplets.emplace_back(static_cast<int>(row), static_cast<int>(a), inner * left);
                triplets.emplace_back(static_cast<int>(row), static_cast<int>(b), -inner * right);
            }
        }
        if (jacobian) triplets.emplace_back(static_cast<int>(row), static_cast<int>(pivot), -inner * total);
        out.residual[row] = -outer * total;
    }
    out.capped = out.capped || ex.capped;
    if (jacobian) {
        jacobian->resize(static_cast<Eigen::Index>(disc.dimension()), static_cast<Eigen::Index>(disc.dimension()));
        jacobian->setFromTriplets(triplets.begin(), triplets.end());
        jacobian->makeCompressed();
    }
    return out;
}

double phase_residual_scale(const Discretization& disc) {
    const double h = disc.grid.h;
    double nu = 0.0;
    for (const auto& row : disc.rates)
        for (double v : row) nu = std::max(nu, std::abs(v));
    return std::max({disc.sigma * disc.sigma / (h * h), disc.sigma * disc.coupling_scale * nu, 1.0});
}

std::vector<double> total_flux_defect(const Discretization& disc, const std::vector<std::vector<double>>& r) {
    const std::size_t nodes = disc.grid.size();
    const double sigma = disc.sigma;
    std::vector<double> out(nodes - 1, 0.0);
    for (std::size_t m = 0; m + 1 < nodes; ++m) {
        double ref = INFINITY;
        for (std::size_t i = 0; i < disc.species; ++i) ref = std::min({ref, r[i][m], r[i][m + 1]});
        double total = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < disc.species; ++i) {
            const double t = disc.drift_exponent[i][m];
            // common factor (sigma/h) e^{-ref/sigma} dropped from both terms
            const double left = bernoulli(t) * std::exp(-(r[i][m] - ref) / sigma);
            const double right = bernoulli(-t) * std::exp(-(r[i][m + 1] - ref) / sigma);
            total += left - right;
            scale += left + right;
        }
        out[m] = scale > 0.0 ? std::abs(total) / scale : 0.0;
    }
    return out;
}

}  // namespace motorlab
