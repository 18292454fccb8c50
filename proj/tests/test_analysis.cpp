#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "motorlab/analysis.hpp"
#include "motorlab/errors.hpp"

using namespace motorlab;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

DensityField solved(const ModelConfig& cfg, std::size_t cells, double sigma) {
    return solve_null_vector(assemble_operator(cfg, build_grid(cells), sigma), Normalization::UnitMass);
}

ModelConfig flat_single() { return fixtures::make_config({Potential::linear(0.0)}, TransitionRates::uniform(1, 0.0)); }

RegionDecomposition regions_of(const PotentialSet& pot) { return decompose_regions(pot, 4097); }

}  // namespace

TEST_CASE("concentration: exponential density against the closed form") {
    const double sigma = 0.01;
    const auto rep = concentration_masses(solved(fixtures::linear_single(), 4096, sigma), 0.1);
    const double exact = std::exp(-10.0) / (1.0 - std::exp(-100.0)) * (1.0 - std::exp(-90.0));
    CHECK(rep.total_far_mass == doctest::Approx(exact).epsilon(1e-4));
    CHECK(rep.motor_effect);
    CHECK(std::abs(sum(rep.rho_estimates) + rep.total_far_mass - 1.0) <= 1e-10);
}

TEST_CASE("concentration: flat density spreads evenly") {
    const auto rep = concentration_masses(solved(flat_single(), 512, 0.05), 0.1);
    CHECK(rep.rho_estimates.at(0) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(rep.total_far_mass == doctest::Approx(0.9).epsilon(1e-9));
    CHECK_FALSE(rep.motor_effect);
}

TEST_CASE("concentration: epsilon between nodes is split linearly") {
    // 512 cells, eps = 0.1 is not a node; a linear density is integrated exactly
    DensityField d;
    d.grid = build_grid(512);
    d.sigma = 0.1;
    d.values.assign(1, std::vector<double>(d.grid.size()));
    for (std::size_t m = 0; m < d.grid.size(); ++m) d.values[0][m] = 2.0 - 2.0 * d.grid.nodes[m] + 1e-3;
    const auto rep = concentration_masses(d, 0.1);
    const double total = 1.0 + 1e-3;
    CHECK(rep.rho_estimates[0] == doctest::Approx((0.2 - 0.01 + 1e-4) / total).epsilon(1e-12));
}

TEST_CASE("concentration: symmetric pair splits the point mass in halves") {
    const auto cfg = fixtures::symmetric_pair(Potential::linear(1.0), 1.0, Normalization::UnitMass);
    const auto rep = concentration_masses(solved(cfg, 512, 0.002), 0.05);
    REQUIRE(rep.rho_estimates.size() == 2);
    CHECK(std::abs(rep.rho_estimates[0] - 0.5) <= 1e-6);
    CHECK(std::abs(rep.rho_estimates[1] - 0.5) <= 1e-6);
    CHECK(std::abs(sum(rep.rho_estimates) + rep.total_far_mass - 1.0) <= 1e-10);
}

TEST_CASE("concentration: renormalizes, and the phase form agrees") {
    const auto cfg = fixtures::demo_pair();
    const auto d = solve_null_vector(assemble_operator(cfg, build_grid(1024), 0.02), Normalization::UnitAtOrigin);
    const auto a = concentration_masses(d, 0.05);
    const auto b = concentration_from_phase(to_phase(d), 0.05);
    CHECK(std::abs(sum(a.rho_estimates) + a.total_far_mass - 1.0) <= 1e-10);
    CHECK(b.total_far_mass == doctest::Approx(a.total_far_mass).epsilon(1e-10));
    for (std::size_t i = 0; i < 2; ++i) CHECK(b.rho_estimates[i] == doctest::Approx(a.rho_estimates[i]).epsilon(1e-10));
    CHECK_THROWS_AS(concentration_masses(d, 0.0), InputError);
    CHECK_THROWS_AS(concentration_masses(d, 1.0), InputError);
}

TEST_CASE("concentration: phase form survives underflow") {
    const auto grid = build_grid(512);
    std::vector<double> r(grid.size());
    for (std::size_t m = 0; m < r.size(); ++m) r[m] = grid.nodes[m];
    const auto p = make_phase_field(grid, 1e-4, {r, r});
    const auto rep = concentration_from_phase(p, 0.05);
    CHECK(rep.total_far_mass <= 1e-200);
    CHECK(rep.rho_estimates[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("convergence study: exact scalar scheme") {
    const auto cfg = fixtures::linear_single();
    const auto grid = build_grid(512);
    const auto lim = applicable_limit(cfg, grid);
    REQUIRE(lim.profile);
    CHECK(lim.theorem == "min-plus");
    const auto table = convergence_study(cfg, grid, {0.1, 0.05, 0.02}, *lim.profile);
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) CHECK(row.errors.at(0) <= 1e-9);
    CHECK_FALSE(table.rate);
    CHECK_FALSE(table.rate_note.empty());
}

TEST_CASE("convergence study: symmetric cosine pair sits on its limit") {
    // n_i = e^{-psi/sigma}/2 solves the scheme and psi - psi(0) is the piecewise limit itself.
    // The wells at 0 and 3/4 are joined through e^{-1/(2 pi sigma)}, so this also checks that the
    // well weights survive the conditioning down to the phase path.
    const auto cfg = fixtures::symmetric_pair(fixtures::cosine());
    const auto grid = build_grid(1600);
    const auto lim = applicable_limit(cfg, grid);
    REQUIRE(lim.profile);
    CHECK(lim.theorem == "piecewise");
    const auto table = convergence_study(cfg, grid, {0.05, 0.02, 0.01, 0.005, 0.002}, *lim.profile);
    REQUIRE(table.rows.size() == 5);
    CHECK(table.rows.back().path == "phase");
    for (const auto& row : table.rows) {
        CHECK(row.errors[0] <= 1e-8);
        CHECK(row.gaps.at(0) <= 1e-20);
    }
}

TEST_CASE("convergence study: cosine pair with unequal amplitudes decays toward the piecewise limit") {
    const auto cfg = fixtures::make_config({fixtures::cosine(1.0), fixtures::cosine(0.5)}, fixtures::pair_rates(1.0, 1.0));
    const auto grid = build_grid(contract_cells(0.005));
    const auto lim = applicable_limit(cfg, grid);
    REQUIRE(lim.profile);
    CHECK(lim.theorem == "piecewise");
    const auto table = convergence_study(cfg, grid, {0.05, 0.02, 0.01, 0.005}, *lim.profile);
    REQUIRE(table.rows.size() == 4);
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        CHECK(table.rows[k].sigma < table.rows[k - 1].sigma);
        for (std::size_t i = 0; i < 2; ++i) CHECK(table.rows[k].errors[i] < table.rows[k - 1].errors[i]);
    }
    REQUIRE(table.rate);
    MESSAGE("fitted exponent " << *table.rate);
    CHECK(*table.rate > 0.0);
}

TEST_CASE("convergence study: input errors") {
    const auto cfg = fixtures::linear_single();
    const auto grid = build_grid(512);
    const auto lim = applicable_limit(cfg, grid);
    CHECK_THROWS_AS(convergence_study(cfg, grid, {}, *lim.profile), InputError);
    CHECK_THROWS_AS(convergence_study(cfg, build_grid(256), {0.1}, *lim.profile), InputError);
}

TEST_CASE("convergence table: a failed sweep truncates") {
    SweepResult sweep;
    sweep.failure = "boom";
    sweep.failed_sigma = 0.01;
    const auto cfg = fixtures::linear_single();
    const auto grid = build_grid(512);
    const auto table = convergence_table(sweep, *applicable_limit(cfg, grid).profile);
    CHECK(table.rows.empty());
    CHECK(table.failure == "boom");
    CHECK(table.failed_sigma == 0.01);
}

TEST_CASE("corollary conditions: all-positive slopes") {
    const PotentialSet pot({Potential::linear(1.0), Potential::linear(2.0)});
    const auto rep = check_corollary_conditions(pot, regions_of(pot), fixtures::pair_rates(1.0, 1.0));
    CHECK(rep.piecewise.empty());
    CHECK(rep.piecewise_holds);
    CHECK(rep.strong_lhs == doctest::Approx(0.0));
    CHECK(rep.strong_rhs == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.strong_holds);
    CHECK(rep.zero_starts_j);
    CHECK(rep.min_slope_positive_at_zero);
}

TEST_CASE("corollary conditions: unit cosine fails, quarter negative lobe holds") {
    const double pi = fixtures::kPi;
    {
        const PotentialSet pot({fixtures::cosine(), fixtures::cosine()});
        const auto rep = check_corollary_conditions(pot, regions_of(pot), fixtures::pair_rates(1.0, 1.0));
        REQUIRE(rep.piecewise.size() == 1);
        const auto& c = rep.piecewise[0];
        REQUIRE(c.j_interval);
        CHECK(c.k_integral == doctest::Approx(-1.0 / pi).epsilon(1e-8));
        CHECK(c.j_integral == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-8));
        CHECK_FALSE(c.holds);
        CHECK_FALSE(rep.piecewise_holds);
        CHECK_FALSE(rep.same_interval_count);  // J = [0, 1/4) and (3/4, 1]
    }
    {
        const PotentialSet pot({fixtures::cosine(1.0, 0.25), fixtures::cosine(1.0, 0.25)});
        const auto rep = check_corollary_conditions(pot, regions_of(pot), fixtures::pair_rates(1.0, 1.0));
        REQUIRE(rep.piecewise.size() == 1);
        CHECK(rep.piecewise[0].k_integral == doctest::Approx(-0.25 / pi).epsilon(1e-8));
        CHECK(rep.piecewise[0].holds);
        CHECK(rep.piecewise_holds);
    }
}

TEST_CASE("corollary conditions: strong-coupling inequality") {
    // J has measure 1/2, int_J cos = 1/pi; sqrt(k) / 2 < 1/pi iff k < 4/pi^2
    const PotentialSet pot({fixtures::cosine(), fixtures::cosine()});
    const auto regions = regions_of(pot);
    const auto yes = check_corollary_conditions(pot, regions, fixtures::pair_rates(0.3, 0.3, Regime::Strong));
    const auto no = check_corollary_conditions(pot, regions, fixtures::pair_rates(0.5, 0.5, Regime::Strong));
    CHECK(yes.strong_rhs == doctest::Approx(1.0 / fixtures::kPi).epsilon(1e-8));
    CHECK(yes.strong_lhs == doctest::Approx(0.5 * std::sqrt(0.3)).epsilon(1e-8));
    CHECK(yes.strong_holds);
    CHECK_FALSE(no.strong_holds);
}

TEST_CASE("blow-up detection flags a species drifting away") {
    SweepResult sweep;
    const auto grid = build_grid(16);
    for (double sigma : {0.04, 0.02, 0.01}) {
        std::vector<double> a(grid.size(), 0.0), b(grid.size(), 0.5);
        SweepEntry e;
        e.sigma = sigma;
        e.phase = make_phase_field(grid, sigma, {a, b});
        sweep.entries.push_back(e);
    }
    const auto rep = detect_blow_up(sweep);
    REQUIRE(rep.blowing_up.size() == 2);
    CHECK_FALSE(rep.blowing_up[0]);
    CHECK(rep.blowing_up[1]);
    CHECK(rep.excess[2][1] == doctest::Approx(50.0));
}

TEST_CASE("motor effect report: demo pair concentrates at sigma 5e-3") {
    const auto cfg = fixtures::demo_pair(Regime::Bounded, Normalization::UnitMass);
    const auto rep = motor_effect_report(cfg, build_grid(contract_cells(0.005)), 0.005);
    CHECK(rep.concentration.motor_effect);
    CHECK(rep.concentration.total_far_mass <= 0.01);
    CHECK(rep.flux_bounds.ok());
    CHECK(rep.theorem == "min-plus");
    REQUIRE(rep.limit_errors);
    for (double e : *rep.limit_errors) CHECK(e <= 0.1);
    CHECK(rep.conditions.zero_starts_j);
}

TEST_CASE("motor effect report: flat potentials show no motor effect") {
    const auto rep = motor_effect_report(flat_single(), build_grid(512), 0.01);
    CHECK_FALSE(rep.concentration.motor_effect);
    CHECK(rep.theorem.empty());
    CHECK_FALSE(rep.limit_errors);
}

TEST_CASE("motor effect report: failing corollary conditions still report") {
    const auto cfg = fixtures::symmetric_pair(fixtures::cosine());
    const auto rep = motor_effect_report(cfg, build_grid(512), 0.02);
    CHECK_FALSE(rep.conditions.piecewise_holds);
    CHECK(rep.limit_errors);
}

TEST_CASE("contract grid size") {
    CHECK(contract_cells(0.05) == 512);
    CHECK(contract_cells(0.005) == 1600);
    CHECK(contract_cells(1e-4) == 80000);
    CHECK_THROWS_AS(contract_cells(0.0), InputError);
}
