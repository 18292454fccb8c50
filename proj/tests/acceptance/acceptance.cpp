// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance                        exit 0 iff every criterion passes
//   acceptance --known-failures 6,9   exit 0 iff exactly the listed criteria fail
//
// The second form is what ctest runs, so a regression or an unexpected pass both show up.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_run.hpp"
#include "motorlab/analysis.hpp"
#include "motorlab/config.hpp"
#include "motorlab/discretize.hpp"
#include "motorlab/hj_limit.hpp"
#include "motorlab/phase.hpp"
#include "motorlab/steady_solver.hpp"

using namespace motorlab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MOTORLAB_CONFIG_DIR;
constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

LoadedConfig config(const std::string& name) { return load_config(kConfigs / (name + ".json")); }

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) w = std::max(w, std::abs(a[k] - b[k]));
    return w;
}

// Every converged phase field seen during the run, for the flux-bound sweep of criterion 4.
struct Solved {
    std::string label;
    PhaseField phase;
    const PotentialSet* pot;
};
std::deque<ModelConfig> g_models;  // stable addresses for Solved::pot
std::vector<Solved> g_solved;

void remember(const std::string& label, const PhaseField& p, const ModelConfig& model) {
    g_solved.push_back({label, p, &model.potentials});
}

const ModelConfig& keep(ModelConfig m) {
    g_models.push_back(std::move(m));
    return g_models.back();
}

// ---------------------------------------------------------------------------

Outcome exact_scalar() {
    const auto& model = keep(config("linear_single").model);
    const Grid grid = build_grid(512);
    double dens = 0.0, phase = 0.0, res = 0.0;
    for (double sigma : {0.1, 0.05, 0.02}) {
        const auto e = solve_steady(model, grid, sigma);
        if (!e.density) return {false, "no density at sigma " + fmt("%g", sigma)};
        const auto& n = e.density->values[0];
        for (std::size_t m = 0; m < grid.size(); ++m) {
            const double exact = std::exp(-grid.nodes[m] / sigma) * n[0];
            dens = std::max(dens, std::abs(n[m] - exact) / exact);
        }
        std::vector<double> guess(grid.size());
        for (std::size_t m = 0; m < grid.size(); ++m) guess[m] = 0.8 * grid.nodes[m];
        NewtonStats stats;
        const auto p = solve_phase_newton(model, grid, sigma, make_phase_field(grid, sigma, {guess}), {}, &stats);
        phase = std::max(phase, max_abs(p.r[0], grid.nodes));
        res = std::max(res, stats.residual);
        remember("linear_single", p, model);
    }
    return {dens <= 1e-9 && phase <= 1e-9 && res <= 1e-9,
            "density rel " + fmt("%.2e", dens) + ", |R - x| " + fmt("%.2e", phase) + ", Newton residual " +
                fmt("%.2e", res)};
}

Outcome symmetric_coupling() {
    const Grid grid = build_grid(512);
    double dn = 0.0, dr = 0.0;
    std::string names;
    for (const char* name : {"symmetric_pair", "cosine_pair"}) {
        const auto& model = keep(config(name).model);
        if (!(model.potentials[0].kind() == model.potentials[1].kind()) ||
            model.rates(0, 1, 0.3) != model.rates(1, 0, 0.3))
            return {false, std::string(name) + " is not symmetric"};
        const auto e = solve_steady(model, grid, 0.02);
        if (!e.density) return {false, std::string(name) + ": no density"};
        const auto& n = e.density->values;
        for (std::size_t m = 0; m < grid.size(); ++m)
            dn = std::max(dn, std::abs(n[0][m] - n[1][m]) / std::max(n[0][m], n[1][m]));
        dr = std::max(dr, max_abs(e.phase.r[0], e.phase.r[1]));
        remember(name, e.phase, model);
        names += names.empty() ? name : std::string(", ") + name;
    }
    return {dn <= 1e-9 && dr <= 1e-9,
            names + ": n rel " + fmt("%.2e", dn) + ", R abs " + fmt("%.2e", dr)};
}

Outcome conservation() {
    double adj = 0.0, flux = 0.0;
    std::size_t count = 0;
    std::string worst;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        const auto& model = keep(load_config(entry.path()).model);
        for (double sigma : {0.05, 0.01}) {
            const Grid grid = build_grid(contract_cells(sigma));
            const auto op = assemble_operator(model, grid, sigma);
            adj = std::max(adj, adjoint_consistency(op));
            const auto e = solve_steady(model, grid, sigma);
            const auto d = total_flux_defect(discretize(model, grid, sigma), e.phase.r);
            const double f = *std::max_element(d.begin(), d.end());
            if (f > flux) {
                flux = f;
                worst = model.name + " at " + fmt("%g", sigma);
            }
            remember(model.name, e.phase, model);
            ++count;
        }
    }
    return {adj <= 1e-12 && flux <= 1e-9 && count >= 16,
            std::to_string(count) + " solves, A^T 1 " + fmt("%.2e", adj) + ", total flux " + fmt("%.2e", flux) +
                (worst.empty() ? "" : " (" + worst + ")")};
}

struct SweepRun {
    const ModelConfig* model = nullptr;
    Grid grid;
    SweepResult sweep;
};

SweepRun run_sweep(const std::string& name, std::size_t cells, const std::vector<double>& sigmas) {
    SweepRun r;
    r.model = &keep(config(name).model);
    r.grid = build_grid(cells);
    r.sweep = continuation_sweep(*r.model, r.grid, sigmas);
    for (const auto& e : r.sweep.entries) remember(name, e.phase, *r.model);
    return r;
}

Outcome limit_convergence(const SweepRun& run) {
    if (!run.sweep.complete()) return {false, "sweep stopped: " + *run.sweep.failure};
    const auto lim = applicable_limit(*run.model, run.grid);
    if (!lim.profile) return {false, "no limit profile"};
    const auto table = convergence_table(run.sweep, *lim.profile);
    std::vector<double> err;
    std::string list;
    for (const auto& row : table.rows) {
        err.push_back(*std::max_element(row.errors.begin(), row.errors.end()));
        list += (list.empty() ? "" : " ") + fmt("%.4f", err.back());
    }
    int soft = 0;
    bool monotone = true;
    for (std::size_t k = 1; k < err.size(); ++k) {
        if (err[k] < err[k - 1]) continue;
        if (err[k] <= 1.1 * err[k - 1] && soft == 0) ++soft;
        else monotone = false;
    }
    return {monotone && err.back() <= 0.05,
            lim.theorem + " limit, errors " + list + (soft ? " (one soft step)" : "")};
}

Outcome gap_scaling(const SweepRun& run) {
    if (!run.sweep.complete()) return {false, "sweep stopped"};
    double lo = INFINITY, hi = 0.0;
    std::string list;
    for (const auto& e : run.sweep.entries) {
        const double q = pairwise_gap(e.phase).pairs.at(0).integral / e.sigma;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        list += (list.empty() ? "" : " ") + fmt("%.2e", q);
    }
    const double ratio = hi / lo;
    return {ratio <= 5.0, "gap/sigma " + list + ", max/min " + fmt("%.1f", ratio)};
}

Outcome motor_effect() {
    const auto& model = keep(config("demo_pair").model);
    const auto rep = motor_effect_report(model, build_grid(contract_cells(5e-3)), 5e-3);
    remember("demo_pair", rep.solution.phase, model);
    const bool mass_ok = model.normalization == Normalization::UnitMass && rep.concentration.total_far_mass <= 0.01;

    // figure regime: densities underflow, only the phase path can represent the state
    const double sigma = 1e-4;
    const Grid grid = build_grid(contract_cells(sigma));
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = solve_steady(model, grid, sigma);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool finite = true;
    for (const auto& r : e.phase.r)
        for (double v : r) finite = finite && std::isfinite(v);
    double drop = 0.0;
    double prev = std::min(e.phase.r[0][0], e.phase.r[1][0]);
    for (std::size_t m = 1; m < grid.size(); ++m) {
        const double cur = std::min(e.phase.r[0][m], e.phase.r[1][m]);
        drop = std::max(drop, prev - cur);
        prev = cur;
    }
    // "nondecreasing" at the resolution of the phase, which is O(sigma)
    const bool phase_ok = e.path == "phase" && e.phase.trusted && finite && drop <= sigma;
    return {mass_ok && phase_ok,
            "far mass at 5e-3 " + fmt("%.2e", rep.concentration.total_far_mass) + "; sigma 1e-4 via " + e.path +
                " path, N " + std::to_string(grid.cells) + ", largest drop of min R_i " + fmt("%.1e", drop) + ", " +
                fmt("%.0f s", secs)};
}

Outcome hamiltonian() {
    std::mt19937_64 rng(20261018);
    std::uniform_real_distribution<double> slope(-10.0, 10.0), rate(0.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        HamiltonianParams q;
        q.psi1_slope = slope(rng);
        q.psi2_slope = slope(rng);
        q.nu1 = rate(rng);
        q.nu2 = rate(rng);
        worst = std::max(worst, std::abs(effective_hamiltonian(0.0, q)));
    }
    // hand-derived root sets
    bool roots_ok = true;
    {
        HamiltonianParams q;  // psi' = 0, nu = 1: (p^2 - 1)^2 = 1, p^2 = 2 fails the branch test
        q.nu1 = q.nu2 = 1.0;
        const auto r = solve_ham_roots(q);
        roots_ok = r.size() == 1 && std::abs(r[0]) <= 1e-10;
    }
    for (int k = 0; k < 50 && roots_ok; ++k) {
        HamiltonianParams q;
        const double s = slope(rng), nu = 0.05 + rate(rng);
        q.psi1_slope = q.psi2_slope = s;
        q.nu1 = q.nu2 = nu;
        // p^2 - s p in {0, 2 nu}; beta_1 + beta_2 = 2 (p^2 - s p - nu)
        std::vector<double> expected;
        for (double p : {0.0, s, (s + std::sqrt(s * s + 8 * nu)) / 2, (s - std::sqrt(s * s + 8 * nu)) / 2})
            if (2 * (p * p - s * p - nu) <= 0.0) expected.push_back(p);
        std::sort(expected.begin(), expected.end());
        const auto r = solve_ham_roots(q);
        roots_ok = r.size() == expected.size();
        for (std::size_t j = 0; roots_ok && j < r.size(); ++j) roots_ok = std::abs(r[j] - expected[j]) <= 1e-10;
    }
    return {worst <= 1e-14 && roots_ok,
            "max |H(0)| " + fmt("%.1e", worst) + " over 1000 draws, root sets " + (roots_ok ? "match" : "differ")};
}

Outcome strong_certificate(const SweepRun& run) {
    if (!run.sweep.complete()) return {false, "sweep stopped"};
    const auto regions = decompose_regions(run.model->potentials, std::max<std::size_t>(4097, 4 * run.grid.cells + 1));
    const double tol = slope_tolerance(run.grid);
    std::string list;
    bool ok = true;
    for (const auto& e : run.sweep.entries) {
        std::size_t bad = 0;
        double worst = 0.0;
        for (const auto& r : e.phase.r) {
            const auto cert =
                certify_strong_slopes(*run.model, regions, run.grid, grid_derivative(r, run.grid.h), tol);
            bad += cert.violations.size();
            for (double m : cert.margin) worst = std::min(worst, m);
        }
        ok = ok && bad == 0;
        list += (list.empty() ? "" : "; ") + fmt("%g: ", e.sigma) + std::to_string(bad) + " nodes, worst " +
                fmt("%.2f", worst);
    }
    return {ok, "tol " + fmt("%.3f", tol) + ", violations " + list};
}

Outcome piecewise_limit() {
    const auto& model = keep(config("cosine_pair").model);
    const Grid grid = build_grid(4096);
    const auto lim = applicable_limit(model, grid);
    if (lim.theorem != "piecewise" || !lim.profile) return {false, "theorem '" + lim.theorem + "'"};
    double err = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m)
        err = std::max(err, std::abs(lim.profile->r[m] - std::sin(2 * kPi * grid.nodes[m]) / (2 * kPi)));
    const double hj = hj_residual(*lim.profile, model.potentials).max_interior;
    const auto unit = check_corollary_conditions(model.potentials, lim.regions, model.rates);
    const auto& quarter = keep(config("cosine_quarter").model);
    const auto qlim = applicable_limit(quarter, grid);
    const auto q = check_corollary_conditions(quarter.potentials, qlim.regions, quarter.rates);
    const bool verdict = !unit.piecewise_holds && q.piecewise_holds;
    return {err <= 1e-8 && hj <= 1e-12 && verdict,
            "profile " + fmt("%.1e", err) + ", interior HJ " + fmt("%.1e", hj) + ", unit cosine " +
                (unit.piecewise_holds ? "holds" : "fails") + ", quarter lobe " +
                (q.piecewise_holds ? "holds" : "fails")};
}

Outcome vanishing() {
    const auto& model = keep(config("vanishing_demo").model);
    const double sigma = 0.01;
    const Grid grid = build_grid(contract_cells(sigma));
    const auto bounds = limit_vanishing_bounds(model, grid);
    const auto e = solve_steady(model, grid, sigma);
    remember("vanishing_demo", e.phase, model);
    const auto chk = check_vanishing(e.phase, bounds, 10 * grid.h);
    const auto conc = concentration_from_phase(e.phase, kDefaultEpsilon);
    const bool ok = chk.violation_counts.at(1) == 0 && conc.total_far_mass <= 0.05;
    return {ok, "R_2 violations " + std::to_string(chk.violation_counts[1]) + " (R_1 " +
                    std::to_string(chk.violation_counts[0]) + "), far mass " + fmt("%.4f", conc.total_far_mass)};
}

Outcome flux_bounds() {
    std::size_t bad = 0;
    double worst = -INFINITY;
    std::string where;
    for (const auto& s : g_solved) {
        const auto rep = check_flux_bounds(s.phase, *s.pot);
        bad += rep.violations.size();
        if (rep.worst_excess > worst) {
            worst = rep.worst_excess;
            where = s.label + fmt(" at %g", s.phase.sigma);
        }
    }
    return {bad == 0 && !g_solved.empty(), std::to_string(g_solved.size()) + " solutions, " + std::to_string(bad) +
                                               " violations, worst excess " + fmt("%.2e", worst) + " (" + where + ")"};
}

Outcome determinism() {
    cli_run::TempDir a("accept_a"), b("accept_b");
    const std::string args = "sweep --config " + cli_run::quote((kConfigs / "demo_pair.json").string()) +
                             " --sigmas 0.05,0.02,0.01 --grid 1024 --format all --no-timestamp --out ";
    const auto ra = cli_run::run(args + cli_run::quote(a.path.string()), a.path);
    const auto rb = cli_run::run(args + cli_run::quote(b.path.string()), b.path);
    if (ra.exit_code != 0 || rb.exit_code != 0) return {false, "sweep exit codes " + std::to_string(ra.exit_code) +
                                                                   ", " + std::to_string(rb.exit_code)};
    std::size_t files = 0, same = 0;
    for (const auto& f : fs::directory_iterator(a.path)) {
        const auto ext = f.path().extension();
        if (ext != ".csv" && ext != ".json" && ext != ".svg") continue;
        ++files;
        const fs::path other = b.path / f.path().filename();
        if (fs::exists(other) && cli_run::slurp(f.path()) == cli_run::slurp(other)) ++same;
    }
    return {files >= 2 && same == files && ra.out == rb.out,
            std::to_string(same) + " of " + std::to_string(files) + " files byte-identical"};
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> known;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "--known-failures" && k + 1 < argc) known = parse_list(argv[++k]);
        else {
            std::fprintf(stderr, "usage: acceptance [--known-failures 6,9]\n");
            return 2;
        }
    }

    const auto demo = run_sweep("demo_pair", 2048, {0.05, 0.02, 0.01, 0.005, 0.002});
    const auto strong = run_sweep("demo_strong", contract_cells(5e-3), {0.05, 0.02, 0.01, 0.005});

    // criterion 4 runs last since it checks every solution gathered by the others
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, exact_scalar},
        {2, symmetric_coupling},
        {3, conservation},
        {5, [&] { return limit_convergence(demo); }},
        {6, [&] { return gap_scaling(demo); }},
        {7, motor_effect},
        {8, hamiltonian},
        {9, [&] { return strong_certificate(strong); }},
        {10, piecewise_limit},
        {11, vanishing},
        {12, determinism},
        {4, flux_bounds},
    };
    std::vector<std::pair<int, Outcome>> results;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        results.emplace_back(id, o);
    }
    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::set<int> failed;
    for (const auto& [id, o] : results) {
        std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        if (!o.pass) failed.insert(id);
    }
    std::printf("%zu of %zu criteria pass\n", results.size() - failed.size(), results.size());
    if (failed == known) {
        if (!known.empty()) std::printf("failures match the known list\n");
        return 0;
    }
    for (int id : failed)
        if (!known.count(id)) std::printf("unexpected failure: criterion %d\n", id);
    for (int id : known)
        if (!failed.count(id)) std::printf("listed as known failure but passed: criterion %d\n", id);
    return 1;
}
