#include "motorlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "motorlab/errors.hpp"

namespace motorlab {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
        if (!known) throw InputError(where + ": unknown key '" + key + "'");
    }
}

double number(const json& obj, const std::string& where, const char* key, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw InputError(where + ": missing '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw InputError(where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw InputError(where + "." + key + ": not finite");
    return d;
}

int integer(const json& obj, const std::string& where, const char* key, std::optional<int> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw InputError(where + ": missing '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw InputError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string text(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw InputError(where + ": missing '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_string()) throw InputError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_array()) throw InputError(where + ": '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number()) throw InputError(where + "." + key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Potential parse_potential(const json& p, const std::string& where) {
    const std::string type = text(p, where, "type");
    Potential out = Potential::linear(0.0);
    if (type == "linear") {
        allow_keys(p, where, {"type", "slope", "intercept", "shift"});
        out = Potential::linear(number(p, where, "slope"), number(p, where, "intercept", 0.0));
    } else if (type == "cosine") {
        allow_keys(p, where, {"type", "amplitude", "frequency", "phase", "negative_scale", "shift"});
        CosineShape s;
        s.amplitude = number(p, where, "amplitude", 1.0);
        s.frequency = number(p, where, "frequency", 1.0);
        s.phase = number(p, where, "phase", 0.0);
        s.negative_scale = number(p, where, "negative_scale", 1.0);
        out = Potential::cosine(s);
    } else if (type == "sawtooth") {
        allow_keys(p, where, {"type", "periods", "amplitude", "rise_fraction", "offset", "mollify_width", "shift"});
        SawtoothShape s;
        s.periods = integer(p, where, "periods", 3);
        s.amplitude = number(p, where, "amplitude", 1.0);
        s.rise_fraction = number(p, where, "rise_fraction", 0.8);
        s.offset = number(p, where, "offset", 0.0);
        s.mollify_width = number(p, where, "mollify_width", 0.01);
        out = Potential::sawtooth(s);
    } else if (type == "spline") {
        allow_keys(p, where, {"type", "knots", "values"});
        return Potential::spline(numbers(p, where, "knots"), numbers(p, where, "values"));
    } else {
        throw InputError(where + ": unknown potential type '" + type + "'");
    }
    if (p.contains("shift")) out = out.shifted(number(p, where, "shift"));
    return out;
}

RateFunction parse_term(const json& t, const std::string& where) {
    const std::string type = text(t, where, "type");
    if (type == "constant") {
        allow_keys(t, where, {"type", "value"});
        return RateFunction::constant(number(t, where, "value"));
    }
    if (type == "bump") {
        allow_keys(t, where, {"type", "center", "half_width", "height"});
        return RateFunction::bump(number(t, where, "center"), number(t, where, "half_width"),
                                  number(t, where, "height"));
    }
    if (type == "zero") {
        allow_keys(t, where, {"type"});
        return RateFunction::zero();
    }
    throw InputError(where + ": unknown rate type '" + type + "'");
}

RateFunction parse_rate(const json& r, const std::string& where) {
    if (r.contains("terms")) {
        allow_keys(r, where, {"from", "to", "terms"});
        if (!r.at("terms").is_array()) throw InputError(where + ".terms: expected an array");
        RateFunction f;
        std::size_t k = 0;
        for (const auto& t : r.at("terms")) f += parse_term(t, where + ".terms[" + std::to_string(k++) + "]");
        return f;
    }
    json term = r;
    term.erase("from");
    term.erase("to");
    return parse_term(term, where);
}

SweepOptions parse_solver(const json& s) {
    const std::string where = "solver";
    allow_keys(s, where, {"newton_tolerance", "max_iterations", "max_halvings", "max_update", "max_substeps"});
    SweepOptions o;
    o.newton.tolerance = number(s, where, "newton_tolerance", o.newton.tolerance);
    o.newton.max_iterations = integer(s, where, "max_iterations", o.newton.max_iterations);
    o.newton.max_halvings = integer(s, where, "max_halvings", o.newton.max_halvings);
    o.newton.max_update = number(s, where, "max_update", o.newton.max_update);
    o.max_substeps = integer(s, where, "max_substeps", o.max_substeps);
    if (!(o.newton.tolerance > 0.0) || o.newton.max_iterations < 1 || o.newton.max_halvings < 0 ||
        !(o.newton.max_update > 0.0) || o.max_substeps < 0)
        throw InputError("solver: settings out of range");
    return o;
}

double smallest_rate(const std::vector<std::vector<std::optional<RateFunction>>>& off) {
    double low = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < off.size(); ++i)
        for (std::size_t j = 0; j < off.size(); ++j) {
            if (i == j) continue;
            any = true;
            if (!off[i][j]) return 0.0;
            for (int s = 0; s <= 200; ++s) low = std::min(low, (*off[i][j])(s / 200.0));
        }
    return any ? std::max(low, 0.0) : 0.0;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

LoadedConfig parse_config(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    allow_keys(doc, "config",
               {"schema_version", "name", "units", "regime", "normalization", "k", "species", "rates", "solver"});
    const int version = integer(doc, "config", "schema_version");
    if (version != kSchemaVersion)
        throw InputError("config: schema_version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kSchemaVersion) + ")");
    if (doc.contains("units")) {
        const auto& u = doc.at("units");
        allow_keys(u, "units", {"length", "time"});
        if (u.contains("length") && text(u, "units", "length") != "domain")
            throw InputError("units.length: only 'domain' (x in [0, 1]) is supported");
        if (u.contains("time") && text(u, "units", "time") != "dimensionless")
            throw InputError("units.time: only 'dimensionless' is supported");
    }

    LoadedConfig out;
    out.source = std::string(source);
    out.hash = fnv1a(source);
    auto& cfg = out.model;
    cfg.name = doc.contains("name") ? text(doc, "config", "name") : std::string("unnamed");
    const Regime regime = regime_from_string(text(doc, "config", "regime"));
    if (doc.contains("normalization")) cfg.normalization = normalization_from_string(text(doc, "config", "normalization"));

    if (!doc.contains("species") || !doc.at("species").is_array() || doc.at("species").empty())
        throw InputError("config: 'species' must be a nonempty array");
    std::vector<Potential> pots;
    for (std::size_t i = 0; i < doc.at("species").size(); ++i) {
        const std::string where = "species[" + std::to_string(i) + "]";
        const auto& s = doc.at("species")[i];
        allow_keys(s, where, {"potential"});
        if (!s.contains("potential")) throw InputError(where + ": missing 'potential'");
        pots.push_back(parse_potential(s.at("potential"), where + ".potential"));
    }
    const std::size_t n = pots.size();
    cfg.potentials = PotentialSet(std::move(pots));

    std::vector<std::vector<std::optional<RateFunction>>> off(n, std::vector<std::optional<RateFunction>>(n));
    if (doc.contains("rates")) {
        if (!doc.at("rates").is_array()) throw InputError("config: 'rates' must be an array");
        for (std::size_t k = 0; k < doc.at("rates").size(); ++k) {
            const std::string where = "rates[" + std::to_string(k) + "]";
            const auto& r = doc.at("rates")[k];
            if (!r.is_object()) throw InputError(where + ": expected an object");
            const int from = integer(r, where, "from");
            const int to = integer(r, where, "to");
            if (from < 1 || to < 1 || static_cast<std::size_t>(from) > n || static_cast<std::size_t>(to) > n)
                throw InputError(where + ": species index out of range 1.." + std::to_string(n));
            if (from == to) throw InputError(where + ": diagonal rates are derived, give off-diagonals only");
            auto& slot = off[to - 1][from - 1];
            if (slot) throw InputError(where + ": duplicate rate " + std::to_string(from) + " -> " + std::to_string(to));
            slot = parse_rate(r, where);
        }
    }
    const double k = doc.contains("k") ? number(doc, "config", "k")
                                       : (regime == Regime::Vanishing ? 0.0 : smallest_rate(off));
    cfg.rates = TransitionRates::with_consistent_diagonal(n, off, regime, k);
    if (doc.contains("solver")) out.solver = parse_solver(doc.at("solver"));
    return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw InputError("error while reading '" + path.string() + "'");
    return parse_config(buf.str());
}

}  // namespace motorlab
