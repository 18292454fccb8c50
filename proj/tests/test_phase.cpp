#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "motorlab/errors.hpp"
#include "motorlab/phase.hpp"
#include "motorlab/steady_solver.hpp"

using namespace motorlab;

namespace {

DensityField uniform_density(std::size_t species, double sigma, std::size_t cells = 64) {
    DensityField d;
    d.grid = build_grid(cells);
    d.sigma = sigma;
    d.values.assign(species, std::vector<double>(d.grid.size(), 1.0));
    return d;
}

PhaseField demo_phase(double sigma, std::size_t cells = 512) {
    const auto cfg = fixtures::demo_pair();
    return solve_steady(cfg, build_grid(cells), sigma).phase;
}

}  // namespace

TEST_CASE("to_phase: uniform densities") {
    const auto p = to_phase(uniform_density(2, 0.1));
    for (const auto& row : p.r)
        for (double v : row) CHECK(v == 0.0);
    for (double s : p.s) CHECK(s == doctest::Approx(-0.1 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("to_phase: logarithm inverts the exponential") {
    const double sigma = 0.05;
    auto d = uniform_density(1, sigma, 128);
    for (std::size_t m = 0; m < d.grid.size(); ++m) d.values[0][m] = std::exp(-d.grid.nodes[m] / sigma);
    const auto p = to_phase(d);
    for (std::size_t m = 0; m < d.grid.size(); ++m) {
        CHECK(std::abs(p.r[0][m] - d.grid.nodes[m]) <= 1e-15);
        CHECK(p.s[m] == p.r[0][m]);
        // consistency of the stored phase with the source density
        CHECK(std::abs(std::exp(-p.r[0][m] / sigma) / d.values[0][m] - 1.0) <= 1e-10);
    }
}

TEST_CASE("to_phase: equal species") {
    const double sigma = 0.02;
    auto d = uniform_density(2, sigma, 64);
    for (std::size_t m = 0; m < d.grid.size(); ++m)
        d.values[0][m] = d.values[1][m] = std::exp(-std::sin(3.0 * d.grid.nodes[m]) / sigma);
    const auto p = to_phase(d);
    for (std::size_t m = 0; m < d.grid.size(); ++m) {
        CHECK(p.r[0][m] == p.r[1][m]);
        CHECK(std::abs(p.s[m] - (p.r[0][m] - sigma * std::log(2.0))) <= 1e-15);
    }
}

TEST_CASE("to_phase: densities under the floor are rejected by node") {
    auto d = uniform_density(2, 0.1, 8);
    d.values[1][5] = 1e-310;
    try {
        to_phase(d);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string what = e.what();
        CHECK(what.find("n_2") != std::string::npos);
        CHECK(what.find("x_5") != std::string::npos);
    }
    d.values[1][5] = 0.0;
    CHECK_THROWS_AS(to_phase(d), InputError);
    d.values[1][5] = -1.0;
    CHECK_THROWS_AS(to_phase(d), InputError);
}

TEST_CASE("flux bounds: linear single species is the equality case") {
    const auto cfg = fixtures::linear_single();
    const auto grid = build_grid(256);
    const auto sol = solve_null_vector(assemble_operator(cfg, grid, 0.05), Normalization::UnitAtOrigin);
    const auto rep = check_flux_bounds(to_phase(sol), cfg.potentials);
    CHECK(rep.ok());
    for (std::size_t m = 0; m < rep.slope.size(); ++m) {
        CHECK(rep.lower[m] == 1.0);
        CHECK(rep.upper[m] == 1.0);
        CHECK(std::abs(rep.slope[m] - 1.0) <= 1e-9);
        CHECK(rep.slack[m] <= 1e-8);
    }
}

TEST_CASE("flux bounds: two equal species follow psi'") {
    const auto cfg = fixtures::symmetric_pair(fixtures::cosine());
    const auto grid = build_grid(512);
    const auto sol = solve_null_vector(assemble_operator(cfg, grid, 0.05), Normalization::UnitAtOrigin);
    const auto rep = check_flux_bounds(to_phase(sol), cfg.potentials);
    CHECK(rep.ok());
    // secant slope of psi against the midpoint derivative: O(h^2 max|psi'''|)
    const double h = grid.h;
    const double tol = h * h * std::pow(2 * fixtures::kPi, 3) / 24.0 + 1e-8;
    for (std::size_t m = 0; m < rep.slope.size(); ++m) CHECK(std::abs(rep.slope[m] - rep.lower[m]) <= tol);
}

TEST_CASE("flux bounds: demo pair at sigma 0.02 has no violations, a kink is caught") {
    auto p = demo_phase(0.02);
    const auto cfg = fixtures::demo_pair();
    const auto rep = check_flux_bounds(p, cfg.potentials);
    CHECK(rep.ok());
    CHECK(rep.worst_excess <= 0.0);

    p.s[200] += 0.05;
    const auto bad = check_flux_bounds(p, cfg.potentials);
    CHECK_FALSE(bad.ok());
    CHECK(std::find(bad.violations.begin(), bad.violations.end(), 199u) != bad.violations.end());
}

TEST_CASE("pairwise gap: symmetric pair and single species") {
    const auto cfg = fixtures::symmetric_pair(fixtures::cosine());
    const auto sol = solve_null_vector(assemble_operator(cfg, build_grid(256), 0.05), Normalization::UnitAtOrigin);
    const auto gap = pairwise_gap(to_phase(sol));
    REQUIRE(gap.pairs.size() == 1);
    CHECK(gap.pairs[0].integral <= 1e-24);
    CHECK(gap.pairs[0].max_abs <= 1e-12);

    CHECK(pairwise_gap(to_phase(uniform_density(1, 0.1))).pairs.empty());
    CHECK(pairwise_gap(to_phase(uniform_density(3, 0.1))).pairs.size() == 3);
}

TEST_CASE("pairwise gap: halving sigma shrinks the integral at least linearly") {
    const double g1 = pairwise_gap(demo_phase(0.02)).pairs.at(0).integral;
    const double g2 = pairwise_gap(demo_phase(0.01)).pairs.at(0).integral;
    const double ratio = g2 / g1;
    MESSAGE("gap ratio at sigma 0.02 -> 0.01: " << ratio);
    CHECK(ratio > 0.0);
    CHECK(ratio <= 0.8);
}

TEST_CASE("phase residual: converged Newton output") {
    const auto cfg = fixtures::demo_pair();
    const auto grid = build_grid(512);
    const double sigma = 0.05;
    const auto disc = discretize(cfg, grid, sigma);
    const auto p = solve_phase_newton(cfg, grid, sigma, make_phase_field(grid, sigma, default_phase_guess(disc)));
    const auto res = phase_residual(p, cfg);
    CHECK(res.max_all <= 1e-9);
    CHECK_FALSE(res.capped);
}

TEST_CASE("phase residual: exact single-species phase, and a perturbed node") {
    const auto cfg = fixtures::make_config({fixtures::cosine()}, TransitionRates::uniform(1, 0.0));
    const auto grid = build_grid(400);
    const double sigma = 0.01;
    std::vector<double> r(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) r[m] = cfg.potentials[0].value(grid.nodes[m]);
    auto p = make_phase_field(grid, sigma, {r});
    const auto res = phase_residual(p, cfg);
    CHECK(res.max_interior <= 1e-13 * res.scale);
    CHECK(res.max_all <= 1e-13 * res.scale);

    p.r[0][123] += 1e-3;
    const auto bumped = phase_residual(p, cfg);
    CHECK(std::abs(bumped.values[0][123]) >= 1e-4 * bumped.scale);
}

TEST_CASE("phase residual: density-path solutions cross-check") {
    const auto cfg = fixtures::demo_pair(Regime::Strong);
    const auto grid = build_grid(512);
    const auto sol = solve_null_vector(assemble_operator(cfg, grid, 0.02), Normalization::UnitAtOrigin);
    const auto res = phase_residual(to_phase(sol), cfg);
    CHECK(res.max_all <= 1e-8 * res.scale);
}

TEST_CASE("grid derivative is exact on quadratics") {
    const auto grid = build_grid(16);
    std::vector<double> f(grid.size());
    for (std::size_t m = 0; m < f.size(); ++m) f[m] = 3.0 * grid.nodes[m] * grid.nodes[m] - grid.nodes[m];
    const auto d = grid_derivative(f, grid.h);
    for (std::size_t m = 0; m < f.size(); ++m) CHECK(d[m] == doctest::Approx(6.0 * grid.nodes[m] - 1.0).epsilon(1e-12));
}

TEST_CASE("gradient bound and sandwich on solved fields") {
    for (auto regime : {Regime::Bounded, Regime::Strong}) {
        const auto cfg = fixtures::demo_pair(regime);
        for (double sigma : {0.02, 0.005}) {
            const auto p = solve_steady(cfg, build_grid(2048), sigma).phase;
            const auto gb = check_gradient_bound(p, cfg);
            CHECK(gb.holds);
            CHECK(sandwich_defect(p) <= 0.0);
        }
    }
}
