#include "motorlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "motorlab/errors.hpp"

namespace motorlab {

namespace {

constexpr double kQuadTolerance = 1e-10;
constexpr double kRateFloor = 1e-12;

std::size_t region_samples(const Grid& grid) { return std::max<std::size_t>(4097, 4 * grid.cells + 1); }

// Masses of nonnegative nodal values (any common scale) split at epsilon, then divided by the total.
ConcentrationReport split_masses(const Grid& grid, const std::vector<std::vector<double>>& values, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
    const double h = grid.h;
    const std::size_t n = grid.size();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(epsilon / h)), grid.cells - 1);
    const double t = epsilon - grid.nodes[k];

    ConcentrationReport rep;
    rep.epsilon = epsilon;
    double total = 0.0;
    std::vector<double> far(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& f = values[i];
        double near = 0.0;
        for (std::size_t m = 0; m < k; ++m) near += 0.5 * h * (f[m] + f[m + 1]);
        const double fe = f[k] + (f[k + 1] - f[k]) * t / h;
        near += 0.5 * t * (f[k] + fe);
        double rest = 0.5 * (h - t) * (fe + f[k + 1]);
        for (std::size_t m = k + 1; m + 1 < n; ++m) rest += 0.5 * h * (f[m] + f[m + 1]);
        rep.masses_near_zero.push_back(near);
        far[i] = rest;
        total += near + rest;
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw InputError("density has no positive finite mass");
    for (auto& v : rep.masses_near_zero) v /= total;
    for (double v : far) rep.total_far_mass += v / total;
    rep.rho_estimates = rep.masses_near_zero;
    rep.motor_effect = rep.total_far_mass <= kMotorEffectThreshold;
    return rep;
}

template <class F>
double integrate(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, kQuadTolerance);
}

}  // namespace

ConcentrationReport concentration_masses(const DensityField& density, double epsilon) {
    if (density.values.empty()) throw InputError("density has no species");
    return split_masses(density.grid, density.values, epsilon);
}

ConcentrationReport concentration_from_phase(const PhaseField& phase, double epsilon) {
    if (phase.r.empty()) throw InputError("phase has no species");
    // n_i ∝ exp(-(R_i - min R) / sigma); the largest weight is 1
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& row : phase.r)
        for (double v : row) lo = std::min(lo, v);
    std::vector<std::vector<double>> w(phase.r.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i].resize(phase.r[i].size());
        for (std::size_t m = 0; m < w[i].size(); ++m) w[i][m] = std::exp(-(phase.r[i][m] - lo) / phase.sigma);
    }
    return split_masses(phase.grid, w, epsilon);
}

ApplicableLimit applicable_limit(const ModelConfig& config, const Grid& grid) {
    ApplicableLimit out;
    out.regions = decompose_regions(config.potentials, region_samples(grid));
    out.assumptions = check_assumptions(config, out.regions);
    const auto& a = out.assumptions;
    switch (config.rates.regime()) {
    case Regime::Bounded:
        if (!out.regions.k_intervals.empty() && a.piecewise_limit) {
            out.theorem = "piecewise";
            out.profile = limit_piecewise(config.potentials, out.regions, grid, a);
        } else if (a.min_plus_limit) {
            out.theorem = "min-plus";
            out.profile = limit_bounded(config.potentials, grid, a);
        }
        break;
    case Regime::Strong:
        if (a.strong_limit) {
            auto s = limit_strong(config, out.regions, grid);
            out.theorem = "strong";
            out.profile = std::move(s.profile);
            out.certificate = std::move(s.certificate);
        }
        break;
    case Regime::Vanishing:
        if (a.vanishing_limit) {
            out.theorem = "vanishing";
            out.vanishing = limit_vanishing_bounds(config, grid);
        }
        break;
    }
    return out;
}

namespace {

// max_m |R_i(x_m) - R_i(0) - R(x_m)| per species
std::vector<double> limit_errors(const PhaseField& p, const LimitProfile& limit) {
    std::vector<double> out;
    for (const auto& ri : p.r) {
        double err = 0.0;
        for (std::size_t m = 0; m < ri.size(); ++m) err = std::max(err, std::abs(ri[m] - ri[0] - limit.r[m]));
        out.push_back(err);
    }
    return out;
}

ConvergenceTable table_from(const SweepResult& sweep, const LimitProfile* limit, double epsilon) {
    ConvergenceTable table;
    table.failure = sweep.failure;
    table.failed_sigma = sweep.failed_sigma;
    for (const auto& e : sweep.entries) {
        const auto& p = e.phase;
        if (limit && p.grid.size() != limit->grid.size()) throw InputError("limit profile and solution grids differ");
        ConvergenceRow row;
        row.sigma = e.sigma;
        row.path = e.path;
        if (limit) row.errors = limit_errors(p, *limit);
        for (const auto& g : pairwise_gap(p).pairs) row.gaps.push_back(g.integral);
        row.far_mass = (e.density ? concentration_masses(*e.density, epsilon) : concentration_from_phase(p, epsilon))
                           .total_far_mass;
        table.rows.push_back(std::move(row));
    }

    if (!limit) {
        table.rate_note = "no applicable limit";
        return table;
    }
    std::vector<double> lx, ly;
    for (const auto& row : table.rows) {
        const double err = *std::max_element(row.errors.begin(), row.errors.end());
        if (err > kRateFloor) {
            lx.push_back(std::log(row.sigma));
            ly.push_back(std::log(err));
        }
    }
    if (lx.size() < 2) {
        table.rate_note = table.rows.size() < 2 ? "fewer than two rows" : "errors at rounding level";
        return table;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k] / n, my += ly[k] / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    table.rate = sxy / sxx;
    return table;
}

}  // namespace

ConvergenceTable convergence_table(const SweepResult& sweep, const LimitProfile& limit, double epsilon) {
    return table_from(sweep, &limit, epsilon);
}

ConvergenceTable convergence_table(const SweepResult& sweep, double epsilon) {
    return table_from(sweep, nullptr, epsilon);
}

ConvergenceTable convergence_study(const ModelConfig& config, const Grid& grid, const std::vector<double>& sigmas,
                                   const LimitProfile& limit, double epsilon, const SweepOptions& options) {
    if (sigmas.empty()) throw InputError("sigma list is empty");
    if (limit.grid.size() != grid.size()) throw InputError("limit profile and solution grids differ");
    return convergence_table(continuation_sweep(config, grid, sigmas, options), limit, epsilon);
}

ConditionReport check_corollary_conditions(const PotentialSet& pot, const RegionDecomposition& regions,
                                           const TransitionRates& rates) {
    const auto lo = [&](double x) { return pot.min_slope(x); };
    const auto hi = [&](double x) { return pot.max_slope(x); };

    ConditionReport rep;
    rep.piecewise_holds = true;
    for (const auto& k : regions.k_intervals) {
        IntervalCondition c;
        c.k_interval = k;
        c.k_integral = integrate(hi, k.lo, k.hi);
        for (const auto& j : regions.j_intervals)
            if (j.hi <= k.lo + kRegionEndpointTolerance) c.j_interval = j;
        if (c.j_interval) c.j_integral = integrate(lo, c.j_interval->lo, c.j_interval->hi);
        c.holds = c.j_interval && std::abs(c.k_integral) < c.j_integral;
        rep.piecewise_holds = rep.piecewise_holds && c.holds;
        rep.piecewise.push_back(c);
    }
    rep.same_interval_count = regions.j_intervals.size() == regions.k_intervals.size();

    double j_len = 0.0;
    for (const auto& j : regions.j_intervals) {
        j_len += j.length();
        rep.strong_rhs += integrate(lo, j.lo, j.hi);
    }
    rep.strong_lhs = std::sqrt(std::max(rates.lower_bound_k(), 0.0)) * std::max(1.0 - j_len, 0.0);
    rep.strong_holds = rep.strong_lhs < rep.strong_rhs;

    rep.zero_starts_j = !regions.j_intervals.empty() && regions.j_intervals.front().lo <= kRegionEndpointTolerance;
    rep.min_slope_positive_at_zero = pot.species_count() > 0 && pot.min_slope(0.0) > 0.0;
    return rep;
}

BlowUpReport detect_blow_up(const SweepResult& sweep) {
    BlowUpReport rep;
    if (sweep.entries.empty()) return rep;
    const std::size_t species = sweep.entries.front().phase.species();
    for (const auto& e : sweep.entries) {
        std::vector<double> mins;
        for (const auto& row : e.phase.r) mins.push_back(*std::min_element(row.begin(), row.end()));
        const double floor = *std::min_element(mins.begin(), mins.end());
        for (auto& v : mins) v = (v - floor) / e.sigma;
        rep.sigmas.push_back(e.sigma);
        rep.excess.push_back(std::move(mins));
    }
    rep.blowing_up.assign(species, false);
    const std::size_t n = rep.excess.size();
    if (n < 3) return rep;
    const double threshold = 2.0 * std::log(1.0 / rep.sigmas.back());
    for (std::size_t i = 0; i < species; ++i) {
        const bool growing = rep.excess[n - 3][i] < rep.excess[n - 2][i] && rep.excess[n - 2][i] < rep.excess[n - 1][i];
        rep.blowing_up[i] = growing && rep.excess[n - 1][i] > threshold;
    }
    return rep;
}

double slope_tolerance(const Grid& grid) { return 10.0 * grid.h + 0.01; }

std::size_t contract_cells(double sigma_min) {
    if (!(sigma_min > 0.0)) throw InputError("sigma must be > 0");
    return std::max<std::size_t>(512, static_cast<std::size_t>(std::ceil(8.0 / sigma_min)));
}

MotorEffectReport motor_effect_report(const ModelConfig& config, const Grid& grid, double sigma_final,
                                      double epsilon) {
    if (!(sigma_final > 0.0) || !std::isfinite(sigma_final)) throw InputError("sigma must be > 0");
    std::vector<double> ladder;
    for (double s = 0.05; s > sigma_final * 1.5; s *= 0.5) ladder.push_back(s);
    ladder.push_back(sigma_final);
    const auto sweep = continuation_sweep(config, grid, ladder);
    if (!sweep.complete()) {
        std::ostringstream msg;
        msg << "steady solve failed at sigma = " << sweep.failed_sigma << ": " << *sweep.failure;
        throw SolverError(msg.str());
    }

    MotorEffectReport rep;
    rep.config_name = config.name;
    rep.regime = config.rates.regime();
    rep.sigma = sigma_final;
    rep.cells = grid.cells;
    rep.solution = sweep.entries.back();
    const auto& e = rep.solution;
    const auto& p = e.phase;
    rep.path = e.path;
    rep.solver_residual = e.residual;
    rep.trusted = p.trusted;
    rep.concentration = e.density ? concentration_masses(*e.density, epsilon) : concentration_from_phase(p, epsilon);
    rep.flux_bounds = check_flux_bounds(p, config.potentials);
    rep.gaps = pairwise_gap(p);
    rep.residual = phase_residual(p, config);
    rep.gradient = check_gradient_bound(p, config);
    rep.sandwich = sandwich_defect(p);

    const auto lim = applicable_limit(config, grid);
    rep.assumptions = lim.assumptions;
    rep.conditions = check_corollary_conditions(config.potentials, lim.regions, config.rates);
    rep.theorem = lim.theorem;
    if (lim.profile) {
        rep.limit_errors = limit_errors(p, *lim.profile);
        rep.limit = lim.profile;
    }
    if (lim.theorem == "strong") {
        std::vector<BoundCertificate> certs;
        for (const auto& ri : p.r)
            certs.push_back(certify_strong_slopes(config, lim.regions, grid, grid_derivative(ri, grid.h),
                                                  slope_tolerance(grid)));
        rep.strong_certificates = std::move(certs);
    }
    if (lim.vanishing) rep.vanishing_check = check_vanishing(p, *lim.vanishing, 10.0 * grid.h);
    if (rep.regime == Regime::Vanishing) rep.blow_up = detect_blow_up(sweep);
    return rep;
}

}  // namespace motorlab
