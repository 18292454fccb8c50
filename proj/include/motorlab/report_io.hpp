#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "motorlab/analysis.hpp"
#include "motorlab/hj_limit.hpp"
#include "motorlab/model.hpp"
#include "motorlab/phase.hpp"
#include "motorlab/steady_solver.hpp"

namespace motorlab {

using Json = nlohmann::ordered_json;

/// %.17g; non-finite values print as nan, inf, -inf.
std::string format_double(double v);

// CSV: header row, x first, species columns in index order.

/// x, n_1..n_I, R_1..R_I, S. Without a density the n columns hold exp(-R/sigma), which may be 0.
void write_solution_csv(std::ostream& out, const SweepEntry& entry);
/// x, R, slope, branch.
void write_limit_csv(std::ostream& out, const LimitProfile& limit);
/// x, lower_i, upper_i, negative_i per species, then j_target.
void write_vanishing_csv(std::ostream& out, const VanishingBounds& bounds);
/// sigma, path, error_i, gap_i_j, far_mass; a failure adds a final "# failed at sigma = ...: ..." line.
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);

Json to_json(const AssumptionReport& r);
Json to_json(const RegionDecomposition& r);
Json to_json(const ConcentrationReport& r);
Json to_json(const BoundReport& r);
Json to_json(const GapReport& r);
Json to_json(const PhaseResidual& r);
Json to_json(const GradientBound& r);
Json to_json(const ConditionReport& r);
Json to_json(const BoundCertificate& r);
Json to_json(const VanishingCheck& r);
Json to_json(const BlowUpReport& r);
Json to_json(const HjResidual& r);
Json to_json(const ConvergenceTable& r);
Json to_json(const MotorEffectReport& r);

/// Residuals, flux bounds, gaps, gradient bound and sandwich of one solved entry.
Json solution_diagnostics(const SweepEntry& entry, const ModelConfig& config);

/// Writes `text` to `path` through a temporary file and rename. IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace motorlab
