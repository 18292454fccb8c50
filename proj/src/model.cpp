#include "motorlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "motorlab/errors.hpp"

namespace motorlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Integral of |cos| from 0 to t.
double abs_cos_integral(double t) {
    const double k = std::floor((t + 0.5 * std::numbers::pi) / std::numbers::pi);
    return 2.0 * k + std::sin(t - k * std::numbers::pi);
}

// Integral from 0 to t of cos scaled by `neg` on its negative lobes.
double lobe_cos_integral(double t, double neg) {
    return 0.5 * (1.0 + neg) * std::sin(t) + 0.5 * (1.0 - neg) * abs_cos_integral(t);
}

double eval_linear(const LinearShape& s, double x, int order) {
    switch (order) {
        case 0: return s.intercept + s.slope * x;
        case 1: return s.slope;
        default: return 0.0;
    }
}

double eval_cosine(const CosineShape& s, double x, int order) {
    const double w = kTwoPi * s.frequency;
    const double theta = w * x + s.phase;
    const double c = std::cos(theta);
    const double lobe = c >= 0.0 ? 1.0 : s.negative_scale;
    switch (order) {
        case 0:
            return s.amplitude / w *
                   (lobe_cos_integral(theta, s.negative_scale) - lobe_cos_integral(s.phase, s.negative_scale));
        case 1: return s.amplitude * lobe * c;
        default: return -s.amplitude * lobe * w * std::sin(theta);
    }
}

double eval_sawtooth(const SawtoothShape& s, double x, int order) {
    const double period = 1.0 / s.periods;
    const double r = s.rise_fraction;
    const double rise = s.amplitude / (r * period);
    const double fall = -s.amplitude / ((1.0 - r) * period);
    const double w = s.mollify_width;
    const double half = 0.5 * w / period;

    const double y = x / period + s.offset;
    const double u = y - std::floor(y);

    const double raw_value = u < r ? s.amplitude * u / r : s.amplitude * (1.0 - (u - r) / (1.0 - r));
    const double raw_slope = u < r ? rise : fall;

    double from = 0.0;
    double to = 0.0;
    double dx = 0.0;  // signed distance from the corner, in x units
    bool blended = false;
    if (std::abs(u - r) < half) {
        from = rise;
        to = fall;
        dx = (u - r) * period;
        blended = true;
    } else if (u < half || 1.0 - u < half) {
        from = fall;
        to = rise;
        dx = (u < 0.5 ? u : u - 1.0) * period;
        blended = true;
    }
    if (!blended) {
        switch (order) {
            case 0: return raw_value;
            case 1: return raw_slope;
            default: return 0.0;
        }
    }
    const double t = (dx + 0.5 * w) / w;
    const double jump = to - from;
    switch (order) {
        case 0: {
            const double ramp = w * (t * t * t - 0.5 * t * t * t * t);
            return raw_value + jump * (dx <= 0.0 ? ramp : ramp - dx);
        }
        case 1: return from + jump * t * t * (3.0 - 2.0 * t);
        default: return jump * 6.0 * t * (1.0 - t) / w;
    }
}

double eval_spline(const SplineShape& s, double x, int order) {
    const auto& k = s.knots;
    const auto& y = s.values;
    const auto& m = s.second_derivatives;
    std::size_t seg = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), x) - k.begin());
    seg = std::clamp<std::size_t>(seg, 1, k.size() - 1) - 1;
    const double h = k[seg + 1] - k[seg];
    const double a = (k[seg + 1] - x) / h;
    const double b = (x - k[seg]) / h;
    switch (order) {
        case 0:
            return a * y[seg] + b * y[seg + 1] + ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
        case 1:
            return (y[seg + 1] - y[seg]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[seg] +
                   (3.0 * b * b - 1.0) / 6.0 * h * m[seg + 1];
        default: return a * m[seg] + b * m[seg + 1];
    }
}

}  // namespace

Potential Potential::linear(double slope, double intercept) {
    if (!std::isfinite(slope) || !std::isfinite(intercept)) throw InputError("linear potential: non-finite parameter");
    return Potential(LinearShape{slope, intercept});
}

Potential Potential::cosine(const CosineShape& shape) {
    if (!(shape.frequency > 0.0) || !std::isfinite(shape.amplitude) || !std::isfinite(shape.phase) ||
        !(shape.negative_scale >= 0.0))
        throw InputError("cosine potential: frequency must be > 0, negative_scale >= 0");
    return Potential(shape);
}

Potential Potential::sawtooth(const SawtoothShape& shape) {
    if (shape.periods < 1) throw InputError("sawtooth potential: periods must be >= 1");
    if (!(shape.rise_fraction > 0.0 && shape.rise_fraction < 1.0))
        throw InputError("sawtooth potential: rise_fraction must lie in (0, 1)");
    if (!(shape.mollify_width > 0.0))
        throw InputError("sawtooth potential: mollify_width must be > 0 (raw sawteeth are not C^{2,1})");
    const double period = 1.0 / shape.periods;
    const double shortest = std::min(shape.rise_fraction, 1.0 - shape.rise_fraction) * period;
    if (shape.mollify_width >= shortest)
        throw InputError("sawtooth potential: mollify_width must be smaller than the shortest linear piece");
    if (!std::isfinite(shape.amplitude) || !std::isfinite(shape.offset))
        throw InputError("sawtooth potential: non-finite parameter");
    return Potential(shape);
}

Potential Potential::spline(std::vector<double> knots, std::vector<double> values) {
    const std::size_t n = knots.size();
    if (n < 2 || values.size() != n) throw InputError("spline potential: need >= 2 knots and matching values");
    if (knots.front() != 0.0 || knots.back() != 1.0) throw InputError("spline potential: knots must span [0, 1]");
    for (std::size_t i = 1; i < n; ++i)
        if (!(knots[i] > knots[i - 1])) throw InputError("spline potential: knots must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("spline potential: non-finite value");

    // Natural spline: tridiagonal system for interior second derivatives.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        const std::size_t inner = n - 2;
        std::vector<double> diag(inner), upper(inner), rhs(inner);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double hl = knots[k] - knots[k - 1];
            const double hr = knots[k + 1] - knots[k];
            diag[k - 1] = 2.0 * (hl + hr);
            upper[k - 1] = hr;
            rhs[k - 1] = 6.0 * ((values[k + 1] - values[k]) / hr - (values[k] - values[k - 1]) / hl);
        }
        // Thomas; sub-diagonal entry of row k is h_{k-1} = knots[k] - knots[k-1].
        for (std::size_t r = 1; r < inner; ++r) {
            const double sub = knots[r + 1] - knots[r];
            const double f = sub / diag[r - 1];
            diag[r] -= f * upper[r - 1];
            rhs[r] -= f * rhs[r - 1];
        }
        m[inner] = rhs[inner - 1] / diag[inner - 1];
        for (std::size_t r = inner - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }
    return Potential(SplineShape{std::move(knots), std::move(values), std::move(m)});
}

Potential Potential::shifted(double dx) const {
    if (std::holds_alternative<SplineShape>(shape_)) throw InputError("spline potentials cannot be shifted");
    Potential copy = *this;
    copy.shift_ += dx;
    return copy;
}

double Potential::evaluate(double x, int order) const {
    const double xs = x + shift_;
    return std::visit(Overloaded{
                          [&](const LinearShape& s) { return eval_linear(s, xs, order); },
                          [&](const CosineShape& s) { return eval_cosine(s, xs, order); },
                          [&](const SawtoothShape& s) { return eval_sawtooth(s, xs, order); },
                          [&](const SplineShape& s) { return eval_spline(s, xs, order); },
                      },
                      shape_);
}

double Potential::value(double x) const { return evaluate(x, 0); }
double Potential::slope(double x) const { return evaluate(x, 1); }
double Potential::curvature(double x) const { return evaluate(x, 2); }

bool Potential::is_c21() const {
    if (const auto* c = std::get_if<CosineShape>(&shape_)) return c->negative_scale == 1.0;
    return true;
}

std::string Potential::kind() const {
    return std::visit(Overloaded{
                          [](const LinearShape&) { return std::string("linear"); },
                          [](const CosineShape&) { return std::string("cosine"); },
                          [](const SawtoothShape&) { return std::string("sawtooth"); },
                          [](const SplineShape&) { return std::string("spline"); },
                      },
                      shape_);
}

PotentialSet::PotentialSet(std::vector<Potential> potentials) : potentials_(std::move(potentials)) {
    if (potentials_.empty()) throw InputError("potential set needs at least one species");
}

double PotentialSet::eval(std::size_t i, double x, int order) const {
    if (i >= potentials_.size()) throw InputError("species index out of range");
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("evaluation point outside [0, 1]");
    if (order < 0 || order > 2) throw InputError("derivative order must be 0, 1 or 2");
    return potentials_[i].evaluate(x, order);
}

double PotentialSet::min_slope(double x) const {
    double m = potentials_.front().slope(x);
    for (std::size_t i = 1; i < potentials_.size(); ++i) m = std::min(m, potentials_[i].slope(x));
    return m;
}

double PotentialSet::max_slope(double x) const {
    double m = potentials_.front().slope(x);
    for (std::size_t i = 1; i < potentials_.size(); ++i) m = std::max(m, potentials_[i].slope(x));
    return m;
}

std::size_t PotentialSet::argmin_slope(double x) const {
    std::size_t best = 0;
    double m = potentials_.front().slope(x);
    for (std::size_t i = 1; i < potentials_.size(); ++i) {
        const double s = potentials_[i].slope(x);
        if (s < m) {
            m = s;
            best = i;
        }
    }
    return best;
}

double eval_potential(const PotentialSet& pot, std::size_t i, double x, int order) { return pot.eval(i, x, order); }

// ---------------------------------------------------------------------------

RateFunction RateFunction::constant(double value) {
    RateFunction f;
    f.terms_.push_back({1.0, ConstantRate{value}});
    return f;
}

RateFunction RateFunction::bump(double center, double half_width, double height) {
    if (!(half_width > 0.0)) throw InputError("bump rate: half_width must be > 0");
    RateFunction f;
    f.terms_.push_back({1.0, BumpRate{center, half_width, height}});
    return f;
}

RateFunction& RateFunction::operator+=(const RateFunction& other) {
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    return *this;
}

RateFunction& RateFunction::operator-=(const RateFunction& other) {
    for (auto t : other.terms_) {
        t.sign = -t.sign;
        terms_.push_back(t);
    }
    return *this;
}

double RateFunction::operator()(double x) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
        const double v = std::visit(Overloaded{
                                        [](const ConstantRate& c) { return c.value; },
                                        [x](const BumpRate& b) {
                                            const double r = (x - b.center) / b.half_width;
                                            if (std::abs(r) >= 1.0) return 0.0;
                                            const double q = 1.0 - r * r;
                                            return b.height * q * q;
                                        },
                                    },
                                    t.shape);
        sum += t.sign * v;
    }
    return sum;
}

bool RateFunction::is_constant() const noexcept {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return std::holds_alternative<ConstantRate>(t.shape); });
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::Bounded: return "bounded";
        case Regime::Strong: return "strong";
        case Regime::Vanishing: return "vanishing";
    }
    return "bounded";
}

Regime regime_from_string(const std::string& name) {
    if (name == "bounded") return Regime::Bounded;
    if (name == "strong") return Regime::Strong;
    if (name == "vanishing") return Regime::Vanishing;
    throw InputError("unknown regime '" + name + "' (expected bounded, strong or vanishing)");
}

TransitionRates::TransitionRates(std::size_t species, std::vector<RateFunction> entries, Regime regime,
                                 double lower_bound_k)
    : species_(species), entries_(std::move(entries)), regime_(regime), lower_bound_k_(lower_bound_k) {
    if (species == 0) throw InputError("transition rates need at least one species");
    if (entries_.size() != species * species) throw InputError("transition rate matrix must be I x I");
    if (!(lower_bound_k >= 0.0)) throw InputError("lower_bound_k must be nonnegative");
}

TransitionRates TransitionRates::with_consistent_diagonal(
    std::size_t species, const std::vector<std::vector<std::optional<RateFunction>>>& off_diagonal, Regime regime,
    double lower_bound_k) {
    if (off_diagonal.size() != species) throw InputError("off-diagonal rate table must have I rows");
    std::vector<RateFunction> entries(species * species);
    for (std::size_t i = 0; i < species; ++i) {
        if (off_diagonal[i].size() != species) throw InputError("off-diagonal rate table must have I columns");
        for (std::size_t j = 0; j < species; ++j) {
            if (i == j || !off_diagonal[i][j]) continue;
            entries[i * species + j] = *off_diagonal[i][j];
        }
    }
    for (std::size_t i = 0; i < species; ++i)
        for (std::size_t j = 0; j < species; ++j)
            if (j != i) entries[i * species + i] += entries[j * species + i];
    return TransitionRates(species, std::move(entries), regime, lower_bound_k);
}

TransitionRates TransitionRates::uniform(std::size_t species, double value, Regime regime) {
    std::vector<std::vector<std::optional<RateFunction>>> off(species, std::vector<std::optional<RateFunction>>(species));
    for (std::size_t i = 0; i < species; ++i)
        for (std::size_t j = 0; j < species; ++j)
            if (i != j) off[i][j] = RateFunction::constant(value);
    return with_consistent_diagonal(species, off, regime, species > 1 ? value : 0.0);
}

bool TransitionRates::all_constant() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const RateFunction& f) { return f.is_constant(); });
}

TransitionRates TransitionRates::with_regime(Regime regime) const {
    TransitionRates copy = *this;
    copy.regime_ = regime;
    return copy;
}

ValidationReport validate_rates(const TransitionRates& rates, std::size_t samples) {
    ValidationReport report;
    const std::size_t n = rates.species_count();
    const bool constant = rates.all_constant();
    const std::size_t count = constant ? 1 : std::max<std::size_t>(samples, 2);
    const bool needs_bound = rates.regime() != Regime::Vanishing;
    const double k = rates.lower_bound_k();

    using Kind = RateViolation::Kind;
    // First offending sample per (kind, i, j).
    std::vector<char> seen(5 * n * n, 0);
    const auto add = [&](Kind kind, std::size_t i, std::size_t j, double x, double expected, double actual,
                         std::string msg) {
        char& flag = seen[(static_cast<std::size_t>(kind) * n + i) * n + j];
        if (flag) return;
        flag = 1;
        report.violations.push_back({kind, i, j, x, expected, actual, std::move(msg)});
    };

    if (rates.regime() == Regime::Strong && n != 2)
        report.violations.push_back({Kind::SpeciesCount, 0, 0, 0.0, 2.0, static_cast<double>(n),
                                     "strong regime requires exactly 2 species"});
    if (needs_bound && n > 1 && !(k > 0.0))
        report.violations.push_back({Kind::BelowLowerBound, 0, 0, 0.0, 0.0, k,
                                     "lower bound k must be > 0 in the " + to_string(rates.regime()) + " regime"});

    for (std::size_t s = 0; s < count; ++s) {
        const double x = constant ? 0.0 : static_cast<double>(s) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double v = rates(i, j, x);
                if (!std::isfinite(v)) {
                    add(Kind::NonFinite, i, j, x, 0.0, v, "non-finite rate");
                    continue;
                }
                if (v < 0.0) add(Kind::Negative, i, j, x, 0.0, v, "negative rate");
                if (i != j && needs_bound && v < k) add(Kind::BelowLowerBound, i, j, x, k, v, "off-diagonal rate below k");
            }
        }
        for (std::size_t col = 0; col < n; ++col) {
            double off = 0.0;
            double scale = std::abs(rates(col, col, x));
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                const double v = rates(r, col, x);
                off += v;
                scale = std::max(scale, std::abs(v));
            }
            const double diag = rates(col, col, x);
            if (std::abs(diag - off) > 1e-12 * std::max(1.0, scale)) {
                std::ostringstream msg;
                msg << "column " << col << ": nu_ii = " << diag << " but off-diagonal column sum = " << off;
                add(Kind::DiagonalMismatch, col, col, x, off, diag, msg.str());
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

Region RegionDecomposition::classify(double x) const {
    // Right-most interval wins at shared endpoints: check intervals starting at x first.
    for (const auto& j : j_intervals)
        if (x >= j.lo && x < j.hi) return Region::Positive;
    for (const auto& k : k_intervals)
        if (x >= k.lo && x < k.hi) return Region::Negative;
    for (const auto& j : j_intervals)
        if (x == j.hi) return Region::Positive;
    for (const auto& k : k_intervals)
        if (x == k.hi) return Region::Negative;
    // An isolated neutral point is a junction: it takes the region that starts right after it.
    for (const auto& n : neutral_set) {
        if (!(n.is_point() && std::abs(x - n.lo) <= kPointWidth)) continue;
        for (const auto& j : j_intervals)
            if (j.lo >= x && j.lo - x <= 2 * kPointWidth) return Region::Positive;
        for (const auto& k : k_intervals)
            if (k.lo >= x && k.lo - x <= 2 * kPointWidth) return Region::Negative;
    }
    return Region::Neutral;
}

double RegionDecomposition::j_measure() const {
    double s = 0.0;
    for (const auto& j : j_intervals) s += j.length();
    return s;
}

double RegionDecomposition::k_measure() const {
    double s = 0.0;
    for (const auto& k : k_intervals) s += k.length();
    return s;
}

RegionDecomposition decompose_regions(const PotentialSet& pot, std::size_t samples, double detection_tolerance) {
    if (samples < 2) throw InputError("decompose_regions: samples must be >= 2");
    RegionDecomposition out;
    out.detection_tolerance = detection_tolerance;
    out.j_intervals = positive_intervals([&](double x) { return pot.min_slope(x); }, samples, detection_tolerance);
    out.k_intervals = positive_intervals([&](double x) { return -pot.max_slope(x); }, samples, detection_tolerance);

    std::vector<Interval> all = out.j_intervals;
    all.insert(all.end(), out.k_intervals.begin(), out.k_intervals.end());
    std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    const auto add_gap = [&](double a, double b) {
        if (b < a) return;
        if (b - a <= kPointWidth) {
            const double mid = 0.5 * (a + b);
            out.neutral_set.push_back({mid, mid});
        } else {
            out.neutral_set.push_back({a, b});
        }
    };
    double cursor = 0.0;
    for (const auto& iv : all) {
        if (iv.lo > cursor) add_gap(cursor, iv.lo);
        cursor = std::max(cursor, iv.hi);
    }
    if (cursor < 1.0) add_gap(cursor, 1.0);
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Normalization normalization) {
    return normalization == Normalization::UnitMass ? "unit_mass" : "unit_at_origin";
}

Normalization normalization_from_string(const std::string& name) {
    if (name == "unit_mass") return Normalization::UnitMass;
    if (name == "unit_at_origin") return Normalization::UnitAtOrigin;
    throw InputError("unknown normalization '" + name + "' (expected unit_mass or unit_at_origin)");
}

void ModelConfig::check_consistent() const {
    if (potentials.species_count() != rates.species_count())
        throw InputError("potentials and rates disagree on the number of species");
}

std::vector<std::vector<Interval>> species_negative_intervals(const PotentialSet& pot, std::size_t samples,
                                                              double tol) {
    std::vector<std::vector<Interval>> out;
    for (std::size_t j = 0; j < pot.species_count(); ++j)
        out.push_back(positive_intervals([&](double x) { return -pot[j].slope(x); }, samples, tol));
    return out;
}

std::vector<std::string> vanishing_coupling_failures(const ModelConfig& config, std::size_t samples) {
    std::vector<std::string> failures;
    const auto& pot = config.potentials;
    const auto& rates = config.rates;
    const std::size_t n = pot.species_count();
    const auto negative = species_negative_intervals(pot, samples);
    constexpr int kProbe = 16;
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& iv : negative[j]) {
            const double reach = std::min(0.02, 0.25 * iv.length());
            bool drained = false;
            for (std::size_t i = 0; i < n && !drained; ++i) {
                if (i == j) continue;
                bool slope_ok = true;
                for (int q = 0; q <= kProbe && slope_ok; ++q) {
                    const double x = iv.lo + iv.length() * q / kProbe;
                    if (pot[i].slope(x) < -kDefaultDetectionTolerance) slope_ok = false;
                }
                if (!slope_ok) continue;
                bool rate_ok = true;
                for (int q = 1; q <= kProbe && rate_ok; ++q) {
                    const double x = iv.hi - reach * q / kProbe;
                    if (!(rates(i, j, x) > 0.0)) rate_ok = false;
                }
                drained = rate_ok;
            }
            if (!drained) {
                std::ostringstream msg;
                msg << "species " << j << " has negative slope on [" << iv.lo << ", " << iv.hi
                    << "] but no species with nonnegative slope there receives it at a positive rate near "
                    << iv.hi;
                failures.push_back(msg.str());
            }
        }
    }
    return failures;
}

AssumptionReport check_assumptions(const ModelConfig& config, const RegionDecomposition& regions,
                                   std::size_t samples) {
    config.check_consistent();
    AssumptionReport r;
    const auto& pot = config.potentials;
    const auto& rates = config.rates;
    const std::size_t n = pot.species_count();

    const auto validation = validate_rates(rates);
    r.rates_consistent = true;
    r.rates_bounded_below = n == 1 || rates.lower_bound_k() > 0.0;
    for (const auto& v : validation.violations) {
        using Kind = RateViolation::Kind;
        if (v.kind == Kind::DiagonalMismatch || v.kind == Kind::Negative || v.kind == Kind::NonFinite)
            r.rates_consistent = false;
        if (v.kind == Kind::BelowLowerBound) r.rates_bounded_below = false;
    }
    if (rates.regime() == Regime::Vanishing && n > 1) {
        // the lower bound is not part of the vanishing regime; report what the samples show
        double low = INFINITY;
        for (std::size_t s = 0; s < 201; ++s)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) low = std::min(low, rates(i, j, s / 200.0));
        r.rates_bounded_below = low > 0.0 && low >= rates.lower_bound_k();
    }

    r.potentials_regular = std::all_of(pot.potentials().begin(), pot.potentials().end(),
                                       [](const Potential& p) { return p.is_c21(); });
    r.positive_region = !regions.j_intervals.empty();

    const double tol = regions.detection_tolerance;
    r.max_slope_positive = true;
    for (std::size_t s = 0; s < samples && r.max_slope_positive; ++s) {
        const double x = static_cast<double>(s) / static_cast<double>(samples - 1);
        if (!(pot.max_slope(x) > tol)) r.max_slope_positive = false;
    }
    if (!regions.k_intervals.empty()) r.max_slope_positive = false;

    const std::size_t pieces = regions.j_intervals.size() + regions.k_intervals.size() + regions.neutral_set.size();
    r.finite_sign_structure = pieces <= std::max<std::size_t>(samples / 8, 4);

    r.vanishing_failures = vanishing_coupling_failures(config, samples);
    r.vanishing_coupling = r.vanishing_failures.empty();
    r.strong_supported = n == 2;

    const bool base = r.rates_consistent && r.potentials_regular && r.positive_region;
    switch (rates.regime()) {
        case Regime::Bounded:
            r.min_plus_limit = base && r.rates_bounded_below && r.max_slope_positive;
            r.piecewise_limit = base && r.rates_bounded_below && r.finite_sign_structure;
            break;
        case Regime::Strong:
            r.strong_limit = base && r.rates_bounded_below && r.max_slope_positive && r.strong_supported;
            if (!r.strong_supported) r.notes.push_back("strong-regime limit is only available for I = 2");
            break;
        case Regime::Vanishing:
            r.vanishing_limit = base && r.max_slope_positive && r.vanishing_coupling;
            break;
    }
    if (!r.potentials_regular) r.notes.push_back("some potential is not C^{2,1}");
    if (!r.positive_region) r.notes.push_back("no interval where every slope is positive");
    if (!r.max_slope_positive) r.notes.push_back("max_i psi'_i is not positive on all of [0,1]");
    return r;
}

}  // namespace motorlab
