#include "motorlab/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "motorlab/discretize.hpp"
#include "motorlab/errors.hpp"

namespace motorlab {

PhaseField to_phase(const DensityField& density) {
    const double sigma = density.sigma;
    if (!(sigma > 0.0)) throw InputError("density field has no positive sigma");
    const std::size_t nodes = density.grid.size();
    std::vector<std::vector<double>> r(density.species(), std::vector<double>(nodes));
    std::vector<double> s(nodes, 0.0);
    for (std::size_t m = 0; m < nodes; ++m) {
        double total = 0.0;
        for (std::size_t i = 0; i < density.species(); ++i) {
            const double n = density.values[i][m];
            if (!std::isfinite(n) || !(n >= kDensityFloor)) {
                std::ostringstream msg;
                msg << "density n_" << i + 1 << "(x_" << m << " = " << density.grid.nodes[m] << ") = " << n
                    << " is not above the floor " << kDensityFloor << "; use the phase path";
                throw InputError(msg.str());
            }
            r[i][m] = -sigma * std::log(n);
            total += n;
        }
        s[m] = -sigma * std::log(total);
    }
    PhaseField p;
    p.grid = density.grid;
    p.sigma = sigma;
    p.r = std::move(r);
    p.s = std::move(s);
    return p;
}

namespace {

// max_i |psi_i''| sampled on [a, b] at spacing at most `step`.
double local_lipschitz(const PotentialSet& pot, double a, double b, double step) {
    const int count = std::max(2, static_cast<int>(std::ceil((b - a) / step)) + 1);
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const double x = a + (b - a) * k / (count - 1);
        for (const auto& p : pot.potentials()) worst = std::max(worst, std::abs(p.curvature(x)));
    }
    return worst;
}

}  // namespace

BoundReport check_flux_bounds(const PhaseField& phase, const PotentialSet& pot) {
    const auto& grid = phase.grid;
    const double h = grid.h;
    const std::size_t cells = grid.size() - 1;
    BoundReport rep;
    rep.midpoints.resize(cells);
    rep.slope.resize(cells);
    rep.lower.resize(cells);
    rep.upper.resize(cells);
    rep.slack.resize(cells);
    rep.worst_excess = -INFINITY;
    for (std::size_t m = 0; m < cells; ++m) {
        const double mid = 0.5 * (grid.nodes[m] + grid.nodes[m + 1]);
        rep.midpoints[m] = mid;
        rep.slope[m] = (phase.s[m + 1] - phase.s[m]) / h;
        rep.lower[m] = pot.min_slope(mid);
        rep.upper[m] = pot.max_slope(mid);
        // Lipschitz constant of psi' near the interface; the stencil of S reaches one cell out.
        const double lip = local_lipschitz(pot, std::max(0.0, grid.nodes[m] - h), std::min(1.0, grid.nodes[m + 1] + h),
                                           h / 4.0);
        rep.slack[m] = 5.0 * h * lip + 1e-9 * (1.0 + std::abs(rep.slope[m]));
        const double excess = std::max(rep.lower[m] - rep.slope[m], rep.slope[m] - rep.upper[m]) - rep.slack[m];
        rep.worst_excess = std::max(rep.worst_excess, excess);
        if (excess > 0.0) rep.violations.push_back(m);
    }
    return rep;
}

GapReport pairwise_gap(const PhaseField& phase) {
    GapReport rep;
    const std::size_t nodes = phase.grid.size();
    std::vector<double> sq(nodes);
    for (std::size_t i = 0; i < phase.species(); ++i)
        for (std::size_t j = i + 1; j < phase.species(); ++j) {
            GapEntry e;
            e.i = i;
            e.j = j;
            for (std::size_t m = 0; m < nodes; ++m) {
                const double d = phase.r[i][m] - phase.r[j][m];
                sq[m] = d * d;
                e.max_abs = std::max(e.max_abs, std::abs(d));
            }
            e.integral = trapezoid(sq, phase.grid.h);
            rep.pairs.push_back(e);
        }
    return rep;
}

PhaseResidual phase_residual(const PhaseField& phase, const ModelConfig& config) {
    if (phase.species() != config.species_count()) throw InputError("phase field and config disagree on species");
    const auto disc = discretize(config, phase.grid, phase.sigma);
    const std::size_t nodes = phase.grid.size();
    std::vector<double> flat;
    flat.reserve(disc.dimension());
    for (const auto& row : phase.r) flat.insert(flat.end(), row.begin(), row.end());
    const auto eval = evaluate_phase_system(disc, flat);

    PhaseResidual out;
    out.scale = phase_residual_scale(disc);
    out.capped = eval.capped;
    out.values.assign(disc.species, std::vector<double>(nodes));
    for (std::size_t i = 0; i < disc.species; ++i)
        for (std::size_t m = 0; m < nodes; ++m) {
            const double g = eval.residual[disc.index(i, m)];
            out.values[i][m] = g;
            out.max_all = std::max(out.max_all, std::abs(g));
            if (m > 0 && m + 1 < nodes) out.max_interior = std::max(out.max_interior, std::abs(g));
        }
    return out;
}

std::vector<double> grid_derivative(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw InputError("derivative needs at least three samples");
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for (std::size_t m = 1; m + 1 < n; ++m) d[m] = (f[m + 1] - f[m - 1]) / (2.0 * h);
    return d;
}

GradientBound check_gradient_bound(const PhaseField& phase, const ModelConfig& config) {
    const auto& grid = phase.grid;
    const double sigma = phase.sigma;
    const double c = config.rates.regime() == Regime::Strong ? 1.0 / sigma : 1.0;
    GradientBound out;
    for (std::size_t i = 0; i < phase.species(); ++i) {
        const auto& psi = config.potentials[i];
        double slope = 0.0, curvature = 0.0, source = 0.0;
        const std::size_t samples = 4 * (grid.size() - 1) + 1;
        for (std::size_t k = 0; k < samples; ++k) {
            const double x = static_cast<double>(k) / static_cast<double>(samples - 1);
            const double p2 = psi.curvature(x);
            slope = std::max(slope, std::abs(psi.slope(x)));
            curvature = std::max(curvature, std::abs(p2));
            source = std::max(source, std::abs(c * config.rates(i, i, x) - p2));
        }
        const auto d = grid_derivative(phase.r[i], grid.h);
        double worst = 0.0;
        for (double v : d) worst = std::max(worst, std::abs(v));
        const double bound = 1.1 * (slope + std::sqrt(sigma * source)) + grid.h * curvature;
        out.max_gradient.push_back(worst);
        out.bound.push_back(bound);
        if (worst > bound) out.holds = false;
    }
    return out;
}

double sandwich_defect(const PhaseField& phase) {
    const double width = phase.sigma * std::log(static_cast<double>(phase.species()));
    double worst = -INFINITY;
    for (std::size_t m = 0; m < phase.grid.size(); ++m) {
        double lo = INFINITY;
        for (const auto& row : phase.r) lo = std::min(lo, row[m]);
        const double s = phase.s[m];
        // rounding allowance relative to the magnitudes involved
        const double tol = 1e-12 * (1.0 + std::abs(lo));
        worst = std::max({worst, s - lo - tol, lo - (s + width) - tol});
    }
    return worst;
}

}  // namespace motorlab
