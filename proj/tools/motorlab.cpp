// motorlab: steady states, sigma sweeps, limit profiles and motor-effect reports.
//
// Exit codes: 0 success, 1 solver failure, 2 input error, 3 I/O error. Failures print a JSON
// object {"error": {...}} on stderr and, when the output directory is usable, to error.json.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "motorlab/analysis.hpp"
#include "motorlab/config.hpp"
#include "motorlab/errors.hpp"
#include "motorlab/hj_limit.hpp"
#include "motorlab/report_io.hpp"
#include "motorlab/svg.hpp"

namespace fs = std::filesystem;
using namespace motorlab;

namespace {

constexpr const char* kOutEnv = "MOTORLAB_OUT";

struct Options {
    std::string config;
    double sigma = 0.0;
    std::vector<double> sigmas;
    std::size_t grid = 0;  // 0: contract size
    std::string out;
    std::string regime_override;
    double epsilon = kDefaultEpsilon;
    bool no_timestamp = false;
    std::string format = "all";
};

struct Context {
    Options opt;
    LoadedConfig loaded;
    fs::path out_dir;
    std::string stem;  // <name>_<hash>
    std::vector<std::string> written;

    const ModelConfig& model() const { return loaded.model; }
    bool want(const char* kind) const { return opt.format == "all" || opt.format == kind; }

    void write(const std::string& name, const std::string& text) {
        write_text_file(out_dir / name, text);
        written.push_back(name);
    }
};

std::string sig(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

fs::path default_out(const Options& opt) {
    if (!opt.out.empty()) return opt.out;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return ".";
}

Context open_context(const Options& opt) {
    Context ctx;
    ctx.opt = opt;
    ctx.loaded = load_config(opt.config);
    if (!opt.regime_override.empty())
        ctx.loaded.model.rates = ctx.loaded.model.rates.with_regime(regime_from_string(opt.regime_override));
    ctx.loaded.model.check_consistent();
    ctx.stem = ctx.loaded.model.name + "_" + hash_hex(ctx.loaded.hash);
    ctx.out_dir = default_out(opt);
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "'");
    return ctx;
}

Grid grid_for(const Options& opt, double sigma_min) {
    return build_grid(opt.grid ? opt.grid : contract_cells(sigma_min));
}

std::vector<double> nodes(const Grid& g) { return g.nodes; }

std::vector<std::string> legend(const Context& ctx, const std::string& extra) {
    std::vector<std::string> out;
    out.push_back("config " + ctx.model().name + " (" + hash_hex(ctx.loaded.hash) + "), regime " +
                  to_string(ctx.model().rates.regime()) + ", I = " + std::to_string(ctx.model().species_count()));
    if (!extra.empty()) out.push_back(extra);
    return out;
}

Json header(const Context& ctx) {
    Json j;
    j["config"] = ctx.model().name;
    j["config_hash"] = hash_hex(ctx.loaded.hash);
    j["regime"] = to_string(ctx.model().rates.regime());
    j["normalization"] = to_string(ctx.model().normalization);
    j["species"] = ctx.model().species_count();
    return j;
}

svg::Panel phase_panel(const SweepEntry& e, const std::optional<LimitProfile>& limit) {
    svg::Panel p;
    p.title = "phases R_i = -sigma ln n_i";
    p.x_label = "x";
    p.y_label = "R";
    for (std::size_t i = 0; i < e.phase.species(); ++i)
        p.series.push_back({"R_" + std::to_string(i + 1), nodes(e.phase.grid), e.phase.r[i]});
    if (limit) {
        // the limit is normalized by R(0) = 0; shift it onto min_i R_i(0)
        double r0 = e.phase.r[0][0];
        for (const auto& r : e.phase.r) r0 = std::min(r0, r[0]);
        std::vector<double> y = limit->r;
        for (double& v : y) v += r0;
        p.series.push_back({"limit (" + limit->theorem + ")", nodes(limit->grid), y, true});
    }
    return p;
}

svg::Panel density_panel(const SweepEntry& e) {
    svg::Panel p;
    p.title = "densities n_i";
    p.x_label = "x";
    p.y_label = "n";
    for (std::size_t i = 0; i < e.density->species(); ++i)
        p.series.push_back({"n_" + std::to_string(i + 1), nodes(e.density->grid), e.density->values[i]});
    return p;
}

int cmd_solve(const Options& opt) {
    auto ctx = open_context(opt);
    const Grid grid = grid_for(opt, opt.sigma);
    const auto entry = solve_steady(ctx.model(), grid, opt.sigma, ctx.loaded.solver);
    const std::string base = ctx.stem + "_solve_s" + sig(opt.sigma) + "_N" + std::to_string(grid.cells);

    if (ctx.want("csv")) {
        std::ostringstream csv;
        write_solution_csv(csv, entry);
        ctx.write(base + ".csv", csv.str());
    }
    if (ctx.want("json")) {
        Json j = header(ctx);
        j["diagnostics"] = solution_diagnostics(entry, ctx.model());
        ctx.write(base + ".json", dump(j));
    }
    if (ctx.want("svg")) {
        svg::Figure f;
        f.title = "steady state";
        f.legend = legend(ctx, "sigma = " + sig(opt.sigma) + ", N = " + std::to_string(grid.cells) + ", path " + entry.path);
        f.timestamp = !opt.no_timestamp;
        if (entry.density) f.panels.push_back(density_panel(entry));
        f.panels.push_back(phase_panel(entry, std::nullopt));
        ctx.write(base + ".svg", svg::render(f));
    }
    Json out = {{"status", "ok"}, {"command", "solve"}, {"files", ctx.written}};
    std::cout << dump(out);
    return 0;
}

int cmd_sweep(const Options& opt) {
    auto ctx = open_context(opt);
    if (opt.sigmas.empty()) throw InputError("--sigmas needs at least one value");
    double smin = opt.sigmas.front();
    for (double s : opt.sigmas) smin = std::min(smin, s);
    if (!(smin > 0.0)) throw InputError("every sigma must be > 0");
    const Grid grid = grid_for(opt, smin);
    const auto lim = applicable_limit(ctx.model(), grid);
    const auto sweep = continuation_sweep(ctx.model(), grid, opt.sigmas, ctx.loaded.solver);
    const auto table = lim.profile ? convergence_table(sweep, *lim.profile, opt.epsilon)
                                   : convergence_table(sweep, opt.epsilon);
    const std::string base = ctx.stem + "_sweep_s" + sig(opt.sigmas.front()) + "-" + sig(opt.sigmas.back()) + "_N" +
                             std::to_string(grid.cells);

    if (ctx.want("csv")) {
        std::ostringstream csv;
        write_convergence_csv(csv, table);
        ctx.write(base + ".csv", csv.str());
    }
    if (ctx.want("json")) {
        Json j = header(ctx);
        j["cells"] = grid.cells;
        j["epsilon"] = opt.epsilon;
        j["theorem"] = lim.theorem.empty() ? Json(nullptr) : Json(lim.theorem);
        j["table"] = to_json(table);
        ctx.write(base + ".json", dump(j));
    }
    if (ctx.want("svg")) {
        svg::Figure f;
        f.title = "convergence to the limit profile";
        f.legend = legend(ctx, "N = " + std::to_string(grid.cells) +
                                   (lim.theorem.empty() ? ", no applicable limit" : ", limit " + lim.theorem));
        f.timestamp = !opt.no_timestamp;
        svg::Panel err;
        err.title = "max |R_i - R_i(0) - R|";
        err.x_label = "sigma";
        err.y_label = "error";
        err.log_x = err.log_y = true;
        svg::Panel far;
        far.title = "mass on [epsilon, 1]";
        far.x_label = "sigma";
        far.y_label = "far mass";
        far.log_x = far.log_y = true;
        std::vector<double> xs, fm;
        for (const auto& row : table.rows) {
            xs.push_back(row.sigma);
            fm.push_back(row.far_mass);
        }
        const std::size_t n = ctx.model().species_count();
        if (lim.profile)
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> ys;
                for (const auto& row : table.rows) ys.push_back(row.errors[i]);
                err.series.push_back({"species " + std::to_string(i + 1), xs, ys, false, true});
            }
        far.series.push_back({"far mass", xs, fm, false, true});
        if (lim.profile) f.panels.push_back(err);
        f.panels.push_back(far);
        ctx.write(base + ".svg", svg::render(f));
    }
    Json out = {{"status", table.failure ? "partial" : "ok"}, {"command", "sweep"}, {"files", ctx.written}};
    std::cout << dump(out);
    if (table.failure) {
        std::ostringstream msg;
        msg << "sweep stopped at sigma = " << table.failed_sigma << ": " << *table.failure;
        throw SolverError(msg.str());
    }
    return 0;
}

int cmd_limit(const Options& opt) {
    auto ctx = open_context(opt);
    const Grid grid = build_grid(opt.grid ? opt.grid : 4096);
    const auto lim = applicable_limit(ctx.model(), grid);
    const std::string base = ctx.stem + "_limit_N" + std::to_string(grid.cells);
    Json j = header(ctx);
    j["cells"] = grid.cells;
    j["regions"] = to_json(lim.regions);
    j["assumptions"] = to_json(lim.assumptions);
    if (lim.theorem.empty()) {
        // the assumption report is the useful output here
        j["theorem"] = nullptr;
        if (ctx.want("json")) ctx.write(base + ".json", dump(j));
        std::string why;
        for (const auto& n : lim.assumptions.notes) why += (why.empty() ? "" : "; ") + n;
        throw InputError("no limit theorem applies to this config (" + why + "); see " + base + ".json");
    }
    j["theorem"] = lim.theorem;
    j["conditions"] = to_json(check_corollary_conditions(ctx.model().potentials, lim.regions, ctx.model().rates));

    svg::Figure f;
    f.title = "limit profile";
    f.legend = legend(ctx, "theorem " + lim.theorem + ", N = " + std::to_string(grid.cells));
    f.timestamp = !opt.no_timestamp;
    std::ostringstream csv;
    if (lim.profile) {
        write_limit_csv(csv, *lim.profile);
        j["hj_residual"] = to_json(hj_residual(*lim.profile, ctx.model().potentials));
        if (lim.certificate) j["certificate"] = to_json(*lim.certificate);
        svg::Panel r{"R", "x", "R", {{"R", nodes(grid), lim.profile->r}}};
        svg::Panel s{"slope R'", "x", "R'", {{"R'", nodes(grid), lim.profile->slope}}};
        for (std::size_t i = 0; i < ctx.model().species_count(); ++i) {
            std::vector<double> d;
            for (double x : grid.nodes) d.push_back(ctx.model().potentials[i].slope(x));
            s.series.push_back({"psi_" + std::to_string(i + 1) + "'", nodes(grid), d, true});
        }
        f.panels = {r, s};
    } else {
        write_vanishing_csv(csv, *lim.vanishing);
        svg::Panel s{"lower bounds on R_i'", "x", "bound", {}};
        for (std::size_t i = 0; i < lim.vanishing->species.size(); ++i)
            s.series.push_back({"species " + std::to_string(i + 1), nodes(grid), lim.vanishing->species[i].lower});
        f.panels = {s};
    }
    if (ctx.want("csv")) ctx.write(base + ".csv", csv.str());
    if (ctx.want("json")) ctx.write(base + ".json", dump(j));
    if (ctx.want("svg")) ctx.write(base + ".svg", svg::render(f));
    Json out = {{"status", "ok"}, {"command", "limit"}, {"theorem", lim.theorem}, {"files", ctx.written}};
    std::cout << dump(out);
    return 0;
}

int cmd_report(const Options& opt) {
    auto ctx = open_context(opt);
    const Grid grid = grid_for(opt, opt.sigma);
    const auto rep = motor_effect_report(ctx.model(), grid, opt.sigma, opt.epsilon);
    const std::string base = ctx.stem + "_report_s" + sig(opt.sigma) + "_N" + std::to_string(grid.cells);
    if (ctx.want("csv")) {
        std::ostringstream csv;
        write_solution_csv(csv, rep.solution);
        ctx.write(base + ".csv", csv.str());
    }
    if (ctx.want("json")) {
        Json j = header(ctx);
        j["epsilon"] = opt.epsilon;
        j["report"] = to_json(rep);
        ctx.write(base + ".json", dump(j));
    }
    if (ctx.want("svg")) {
        svg::Figure f;
        f.title = "motor effect report";
        f.columns = 2;
        f.legend = legend(ctx, "sigma = " + sig(opt.sigma) + ", N = " + std::to_string(grid.cells) + ", epsilon = " +
                                   sig(opt.epsilon) + ", motor effect: " +
                                   (rep.concentration.motor_effect ? "yes" : "no"));
        f.timestamp = !opt.no_timestamp;
        if (rep.solution.density) f.panels.push_back(density_panel(rep.solution));
        f.panels.push_back(phase_panel(rep.solution, rep.limit));
        svg::Panel bars;
        bars.title = "mass split at epsilon";
        bars.y_label = "mass";
        for (std::size_t i = 0; i < rep.concentration.rho_estimates.size(); ++i)
            bars.bars.push_back({"rho_" + std::to_string(i + 1), rep.concentration.rho_estimates[i]});
        bars.bars.push_back({"far", rep.concentration.total_far_mass});
        f.panels.push_back(bars);
        ctx.write(base + ".svg", svg::render(f));
    }
    Json out = {{"status", "ok"},
                {"command", "report"},
                {"motor_effect", rep.concentration.motor_effect},
                {"files", ctx.written}};
    std::cout << dump(out);
    return 0;
}

int fail(const Options& opt, int code, const std::string& kind, const std::string& message) {
    Json j = {{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}};
    std::cerr << dump(j);
    // best effort: never masks the original failure
    std::error_code ec;
    const fs::path dir = default_out(opt);
    if (code != 3 && fs::is_directory(dir, ec)) {
        try {
            write_text_file(dir / "error.json", dump(j));
        } catch (const std::exception&) {
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary molecular-motor Fokker-Planck lab: steady states at small sigma, limit profiles, "
                 "motor-effect reports.\nOutput directory: --out, else $" +
                 std::string(kOutEnv) + ", else the current directory."};
    app.require_subcommand(1);
    Options opt;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "model config (JSON, schema_version 1)")->required();
        sub->add_option("--grid", opt.grid, "cells N (default max(512, ceil(8 / sigma_min)); 4096 for limit)")
            ->check(CLI::Range(std::size_t{4}, std::size_t{50000000}));
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--regime-override", opt.regime_override, "bounded, strong or vanishing")
            ->check(CLI::IsMember({"bounded", "strong", "vanishing"}));
        sub->add_option("--format", opt.format, "files to write")->check(CLI::IsMember({"csv", "json", "svg", "all"}));
        sub->add_flag("--no-timestamp", opt.no_timestamp, "omit the generation time from SVG files");
    };
    const auto epsilon = [&](CLI::App* sub) {
        sub->add_option("--epsilon", opt.epsilon, "concentration cutoff")->check(CLI::Range(0.0, 1.0));
    };

    auto* solve = app.add_subcommand("solve", "steady state at one sigma: solution CSV, diagnostics JSON, SVG");
    common(solve);
    solve->add_option("--sigma", opt.sigma, "diffusion sigma > 0")->required()->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "sigma continuation and convergence table against the limit");
    common(sweep);
    epsilon(sweep);
    sweep->add_option("--sigmas", opt.sigmas, "strictly descending list, comma separated")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);

    auto* limit = app.add_subcommand("limit", "limit profile (or vanishing-regime constraints) for the config");
    common(limit);

    auto* report = app.add_subcommand("report", "motor-effect report JSON and SVG dashboard");
    common(report);
    epsilon(report);
    report->add_option("--sigma", opt.sigma, "diffusion sigma > 0")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(opt, 2, "input", e.what());
    }

    try {
        if (*solve) return cmd_solve(opt);
        if (*sweep) return cmd_sweep(opt);
        if (*limit) return cmd_limit(opt);
        return cmd_report(opt);
    } catch (const InputError& e) {
        return fail(opt, 2, "input", e.what());
    } catch (const SolverError& e) {
        return fail(opt, 1, "solver", e.what());
    } catch (const IoError& e) {
        return fail(opt, 3, "io", e.what());
    } catch (const std::exception& e) {
        return fail(opt, 1, "internal", e.what());
    }
}
