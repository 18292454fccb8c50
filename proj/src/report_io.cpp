#include "motorlab/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <system_error>

#include "motorlab/errors.hpp"

namespace motorlab {

namespace {

constexpr std::size_t kListedViolations = 20;

// JSON has no nan/inf; they become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json nums(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

template <class T>
Json first_indices(const std::vector<T>& v) {
    Json a = Json::array();
    for (std::size_t k = 0; k < std::min(v.size(), kListedViolations); ++k) a.push_back(v[k]);
    return a;
}

Json intervals(const std::vector<Interval>& v) {
    Json a = Json::array();
    for (const auto& i : v) a.push_back(Json::array({num(i.lo), num(i.hi)}));
    return a;
}

double min_of(const std::vector<double>& v) {
    double m = INFINITY;
    for (double x : v)
        if (std::isfinite(x)) m = std::min(m, x);
    return m;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_solution_csv(std::ostream& out, const SweepEntry& entry) {
    const auto& p = entry.phase;
    const std::size_t n = p.species();
    out << "x";
    for (std::size_t i = 0; i < n; ++i) out << ",n_" << i + 1;
    for (std::size_t i = 0; i < n; ++i) out << ",R_" << i + 1;
    out << ",S\n";
    for (std::size_t m = 0; m < p.grid.size(); ++m) {
        out << format_double(p.grid.nodes[m]);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = entry.density ? entry.density->values[i][m] : std::exp(-p.r[i][m] / p.sigma);
            out << ',' << format_double(d);
        }
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(p.r[i][m]);
        out << ',' << format_double(p.s[m]) << '\n';
    }
}

void write_limit_csv(std::ostream& out, const LimitProfile& limit) {
    out << "x,R,slope,branch\n";
    for (std::size_t m = 0; m < limit.grid.size(); ++m)
        out << format_double(limit.grid.nodes[m]) << ',' << format_double(limit.r[m]) << ','
            << format_double(limit.slope[m]) << ',' << to_string(limit.labels[m]) << '\n';
}

void write_vanishing_csv(std::ostream& out, const VanishingBounds& bounds) {
    out << "x";
    for (std::size_t i = 0; i < bounds.species.size(); ++i)
        out << ",lower_" << i + 1 << ",upper_" << i + 1 << ",negative_" << i + 1;
    out << ",j_target\n";
    for (std::size_t m = 0; m < bounds.grid.size(); ++m) {
        out << format_double(bounds.grid.nodes[m]);
        for (const auto& s : bounds.species)
            out << ',' << format_double(s.lower[m]) << ',' << format_double(s.upper[m]) << ','
                << (s.negative_set[m] ? 1 : 0);
        out << ',' << format_double(bounds.j_target[m]) << '\n';
    }
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
    const std::size_t n = table.rows.empty() ? 0 : table.rows.front().errors.size();
    out << "sigma,path";
    for (std::size_t i = 0; i < n; ++i) out << ",error_" << i + 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out << ",gap_" << i + 1 << '_' << j + 1;
    out << ",far_mass\n";
    for (const auto& row : table.rows) {
        out << format_double(row.sigma) << ',' << row.path;
        for (double e : row.errors) out << ',' << format_double(e);
        for (double g : row.gaps) out << ',' << format_double(g);
        out << ',' << format_double(row.far_mass) << '\n';
    }
    if (table.failure) out << "# failed at sigma = " << format_double(table.failed_sigma) << ": " << *table.failure << '\n';
}

Json to_json(const AssumptionReport& r) {
    Json j;
    j["rates_consistent"] = r.rates_consistent;
    j["rates_bounded_below"] = r.rates_bounded_below;
    j["potentials_regular"] = r.potentials_regular;
    j["positive_region"] = r.positive_region;
    j["max_slope_positive"] = r.max_slope_positive;
    j["finite_sign_structure"] = r.finite_sign_structure;
    j["vanishing_coupling"] = r.vanishing_coupling;
    j["strong_supported"] = r.strong_supported;
    j["vanishing_failures"] = r.vanishing_failures;
    j["limits"] = {{"min_plus", r.min_plus_limit},
                   {"piecewise", r.piecewise_limit},
                   {"strong", r.strong_limit},
                   {"vanishing", r.vanishing_limit}};
    j["notes"] = r.notes;
    return j;
}

Json to_json(const RegionDecomposition& r) {
    return {{"J", intervals(r.j_intervals)},
            {"K", intervals(r.k_intervals)},
            {"neutral", intervals(r.neutral_set)},
            {"detection_tolerance", r.detection_tolerance}};
}

Json to_json(const ConcentrationReport& r) {
    return {{"epsilon", r.epsilon},
            {"masses_near_zero", nums(r.masses_near_zero)},
            {"rho_estimates", nums(r.rho_estimates)},
            {"total_far_mass", num(r.total_far_mass)},
            {"threshold", kMotorEffectThreshold},
            {"motor_effect", r.motor_effect}};
}

Json to_json(const BoundReport& r) {
    Json where = Json::array();
    for (std::size_t k = 0; k < std::min(r.violations.size(), kListedViolations); ++k)
        where.push_back(num(r.midpoints[r.violations[k]]));
    return {{"ok", r.ok()},
            {"interfaces", r.slope.size()},
            {"violations", r.violations.size()},
            {"worst_excess", num(r.worst_excess)},
            {"first_violation_midpoints", where}};
}

Json to_json(const GapReport& r) {
    Json a = Json::array();
    for (const auto& p : r.pairs)
        a.push_back({{"i", p.i + 1}, {"j", p.j + 1}, {"integral", num(p.integral)}, {"max_abs", num(p.max_abs)}});
    return a;
}

Json to_json(const PhaseResidual& r) {
    return {{"max_interior", num(r.max_interior)},
            {"max_all", num(r.max_all)},
            {"scale", num(r.scale)},
            {"relative", num(r.max_all / r.scale)},
            {"capped", r.capped}};
}

Json to_json(const GradientBound& r) {
    return {{"holds", r.holds}, {"max_gradient", nums(r.max_gradient)}, {"bound", nums(r.bound)}};
}

Json to_json(const ConditionReport& r) {
    Json pieces = Json::array();
    for (const auto& c : r.piecewise) {
        Json e;
        e["K"] = {num(c.k_interval.lo), num(c.k_interval.hi)};
        e["J"] = c.j_interval ? Json::array({num(c.j_interval->lo), num(c.j_interval->hi)}) : Json(nullptr);
        e["int_K_max_slope"] = num(c.k_integral);
        e["int_J_min_slope"] = num(c.j_integral);
        e["holds"] = c.holds;
        pieces.push_back(e);
    }
    Json j;
    j["piecewise"] = {{"holds", r.piecewise_holds}, {"same_interval_count", r.same_interval_count}, {"pairs", pieces}};
    j["strong"] = {{"lhs_sqrt_k_times_measure", num(r.strong_lhs)},
                   {"rhs_int_J_min_slope", num(r.strong_rhs)},
                   {"holds", r.strong_holds}};
    j["zero_starts_J"] = r.zero_starts_j;
    j["min_slope_positive_at_zero"] = r.min_slope_positive_at_zero;
    return j;
}

Json to_json(const BoundCertificate& r) {
    return {{"ok", r.ok()},
            {"k", r.k},
            {"nodes", r.margin.size()},
            {"violations", r.violations.size()},
            {"min_margin", num(min_of(r.margin))},
            {"first_violation_nodes", first_indices(r.violations)},
            {"display_violations", r.display_violations.size()},
            {"literal_display_failures", r.literal_display_failures}};
}

Json to_json(const VanishingCheck& r) {
    return {{"ok", r.ok()},
            {"worst_excess", nums(r.worst_excess)},
            {"violation_counts", r.violation_counts},
            {"j_deviation", num(r.j_deviation)}};
}

Json to_json(const BlowUpReport& r) {
    Json ex = Json::array();
    for (const auto& row : r.excess) ex.push_back(nums(row));
    Json flags = Json::array();
    for (bool b : r.blowing_up) flags.push_back(static_cast<bool>(b));
    return {{"sigmas", nums(r.sigmas)}, {"excess_over_sigma", ex}, {"blowing_up", flags}};
}

Json to_json(const HjResidual& r) {
    return {{"max_interior", num(r.max_interior)}, {"max_junction", num(r.max_junction)}, {"max_all", num(r.max_all)}};
}

Json to_json(const ConvergenceTable& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"sigma", row.sigma},
                        {"path", row.path},
                        {"errors", nums(row.errors)},
                        {"gaps", nums(row.gaps)},
                        {"far_mass", num(row.far_mass)}});
    Json j;
    j["rows"] = rows;
    j["rate"] = r.rate ? num(*r.rate) : Json(nullptr);
    if (!r.rate) j["rate_note"] = r.rate_note;
    j["complete"] = !r.failure.has_value();
    if (r.failure) j["failure"] = {{"sigma", r.failed_sigma}, {"message", *r.failure}};
    return j;
}

Json solution_diagnostics(const SweepEntry& entry, const ModelConfig& config) {
    const auto& p = entry.phase;
    Json j;
    j["sigma"] = entry.sigma;
    j["cells"] = p.grid.cells;
    j["path"] = entry.path;
    j["solver_residual"] = num(entry.residual);
    j["trusted"] = p.trusted;
    j["phase_residual"] = to_json(phase_residual(p, config));
    j["flux_bounds"] = to_json(check_flux_bounds(p, config.potentials));
    j["phase_gap"] = to_json(pairwise_gap(p));
    j["gradient_bound"] = to_json(check_gradient_bound(p, config));
    j["sandwich_defect"] = num(sandwich_defect(p));
    Json mins = Json::array();
    for (const auto& r : p.r) mins.push_back(num(*std::min_element(r.begin(), r.end())));
    j["min_R"] = mins;
    return j;
}

Json to_json(const MotorEffectReport& r) {
    Json j;
    j["config"] = r.config_name;
    j["regime"] = to_string(r.regime);
    j["sigma"] = r.sigma;
    j["cells"] = r.cells;
    j["path"] = r.path;
    j["solver_residual"] = num(r.solver_residual);
    j["trusted"] = r.trusted;
    j["motor_effect"] = r.concentration.motor_effect;
    j["concentration"] = to_json(r.concentration);
    j["flux_bounds"] = to_json(r.flux_bounds);
    j["phase_gap"] = to_json(r.gaps);
    j["phase_residual"] = to_json(r.residual);
    j["gradient_bound"] = to_json(r.gradient);
    j["sandwich_defect"] = num(r.sandwich);
    j["assumptions"] = to_json(r.assumptions);
    j["conditions"] = to_json(r.conditions);
    j["theorem"] = r.theorem.empty() ? Json(nullptr) : Json(r.theorem);
    j["limit_errors"] = r.limit_errors ? nums(*r.limit_errors) : Json(nullptr);
    if (r.strong_certificates) {
        Json a = Json::array();
        for (const auto& c : *r.strong_certificates) a.push_back(to_json(c));
        j["strong_certificates"] = a;
    }
    if (r.vanishing_check) j["vanishing_check"] = to_json(*r.vanishing_check);
    if (r.blow_up) j["blow_up"] = to_json(*r.blow_up);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << text;
        out.flush();
        if (!out) throw IoError("error while writing '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write '" + path.string() + "'");
    }
}

}  // namespace motorlab
