#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "motorlab/model.hpp"
#include "motorlab/steady_solver.hpp"

namespace motorlab {

inline constexpr int kSchemaVersion = 1;

struct LoadedConfig {
    ModelConfig model;
    SweepOptions solver;
    std::string source;      ///< raw bytes as read
    std::uint64_t hash = 0;  ///< FNV-1a of `source`
};

/// JSON document, schema version 1:
///
///   {
///     "schema_version": 1,
///     "name": "demo_pair",
///     "units": {"length": "domain", "time": "dimensionless"},         optional
///     "regime": "bounded" | "strong" | "vanishing",
///     "normalization": "unit_mass" | "unit_at_origin",                optional, unit_at_origin
///     "k": 1.0,                                                      optional, see below
///     "species": [ {"potential": {...}}, ... ],
///     "rates": [ {"from": 1, "to": 2, "terms": [{...}, ...]}, ... ], off-diagonal only
///     "solver": {"newton_tolerance": 1e-9, "max_iterations": 100,    optional
///                "max_halvings": 20, "max_update": 4.0, "max_substeps": 8}
///   }
///
/// Potentials: {"type": "linear", "slope", "intercept"}, {"type": "cosine", "amplitude",
/// "frequency", "phase", "negative_scale"}, {"type": "sawtooth", "periods", "amplitude",
/// "rise_fraction", "offset", "mollify_width"}, {"type": "spline", "knots", "values"}; every
/// closed-form preset also takes "shift". Rate terms: {"type": "constant", "value"},
/// {"type": "bump", "center", "half_width", "height"}, {"type": "zero"}; a single term may be
/// written inline instead of "terms". Species are numbered from 1; nu_ii is built from the
/// off-diagonals. Omitted "k" defaults to the smallest sampled off-diagonal rate (0 in the
/// vanishing regime). Unknown keys are errors.
LoadedConfig parse_config(std::string_view text);

/// A missing or unreadable config is an input problem, like a malformed one: InputError.
LoadedConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hash_hex(std::uint64_t hash);

}  // namespace motorlab
