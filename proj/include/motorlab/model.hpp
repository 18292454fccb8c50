#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace motorlab {

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// psi(x) = intercept + slope * x
struct LinearShape {
    double slope = 1.0;
    double intercept = 0.0;
};

/// psi'(x) = amplitude * c(2 pi f x + phase), where c(t) = cos t on its positive
/// lobes and negative_scale * cos t on its negative lobes; psi(0) = 0.
/// negative_scale != 1 leaves psi' only Lipschitz (psi is C^{1,1}).
struct CosineShape {
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
    double negative_scale = 1.0;
};

/// Periodic asymmetric ratchet with period 1/periods. Over one period it rises by
/// `amplitude` on a fraction `rise_fraction` of the period and falls back on the rest.
/// Each corner is mollified over `mollify_width` by blending the two slopes with
/// the cubic smoothstep 3t^2 - 2t^3, which keeps psi in C^{2,1}. Outside the blend
/// zones the mollified curve coincides with the raw sawtooth.
struct SawtoothShape {
    int periods = 3;
    double amplitude = 1.0;
    double rise_fraction = 0.8;
    double offset = 0.0;  ///< in units of one period
    double mollify_width = 0.01;
};

/// Natural cubic spline through (knots, values); knots span exactly [0, 1].
struct SplineShape {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> second_derivatives;  ///< filled by the constructor
};

class Potential {
public:
    static Potential linear(double slope, double intercept = 0.0);
    static Potential cosine(const CosineShape& shape);
    static Potential sawtooth(const SawtoothShape& shape);
    static Potential spline(std::vector<double> knots, std::vector<double> values);

    /// Copy evaluated at x + dx. Only closed-form presets can be shifted.
    Potential shifted(double dx) const;

    double value(double x) const;
    double slope(double x) const;
    double curvature(double x) const;

    /// order 0, 1 or 2. No range check; callers outside [0, 1] get the natural extension.
    double evaluate(double x, int order) const;

    /// True when psi is C^{2,1} on [0, 1].
    bool is_c21() const;
    double shift() const noexcept { return shift_; }
    std::string kind() const;

    using Shape = std::variant<LinearShape, CosineShape, SawtoothShape, SplineShape>;
    const Shape& shape() const noexcept { return shape_; }

private:
    explicit Potential(Shape shape) : shape_(std::move(shape)) {}

    Shape shape_;
    double shift_ = 0.0;
};

class PotentialSet {
public:
    PotentialSet() = default;
    explicit PotentialSet(std::vector<Potential> potentials);

    std::size_t species_count() const noexcept { return potentials_.size(); }
    const Potential& operator[](std::size_t i) const { return potentials_.at(i); }
    const std::vector<Potential>& potentials() const noexcept { return potentials_; }

    /// Checked evaluation: x in [0,1], i < I, order in {0,1,2}; InputError otherwise.
    double eval(std::size_t i, double x, int order) const;

    double min_slope(double x) const;
    double max_slope(double x) const;
    /// Lowest species index attaining the minimum slope.
    std::size_t argmin_slope(double x) const;

private:
    std::vector<Potential> potentials_;
};

/// Free-function form of PotentialSet::eval.
double eval_potential(const PotentialSet& pot, std::size_t i, double x, int order);

// ---------------------------------------------------------------------------
// Transition rates
// ---------------------------------------------------------------------------

struct ConstantRate {
    double value = 0.0;
};

/// height * (1 - ((x - center)/half_width)^2)^2 on |x - center| < half_width, else 0.
struct BumpRate {
    double center = 0.5;
    double half_width = 0.1;
    double height = 1.0;
};

/// Sum of terms; an empty sum is the zero rate.
class RateFunction {
public:
    RateFunction() = default;
    static RateFunction constant(double value);
    static RateFunction bump(double center, double half_width, double height);
    static RateFunction zero() { return RateFunction{}; }

    RateFunction& operator+=(const RateFunction& other);
    RateFunction& operator-=(const RateFunction& other);

    double operator()(double x) const;
    bool is_constant() const noexcept;

    struct Term {
        double sign = 1.0;
        std::variant<ConstantRate, BumpRate> shape;
    };
    const std::vector<Term>& terms() const noexcept { return terms_; }

private:
    std::vector<Term> terms_;
};

enum class Regime { Bounded, Strong, Vanishing };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

/// Matrix nu_ij(x). Row i, column j: rate at which species j feeds species i (i != j);
/// the diagonal nu_ii is the total loss rate of species i.
class TransitionRates {
public:
    TransitionRates() = default;
    TransitionRates(std::size_t species, std::vector<RateFunction> entries, Regime regime,
                    double lower_bound_k);

    /// Builds the diagonal from condition nu_ii = sum_{j != i} nu_ji.
    static TransitionRates with_consistent_diagonal(
        std::size_t species, const std::vector<std::vector<std::optional<RateFunction>>>& off_diagonal,
        Regime regime, double lower_bound_k);

    /// All off-diagonals equal to `value`, diagonal (I-1)*value.
    static TransitionRates uniform(std::size_t species, double value, Regime regime = Regime::Bounded);

    std::size_t species_count() const noexcept { return species_; }
    Regime regime() const noexcept { return regime_; }
    double lower_bound_k() const noexcept { return lower_bound_k_; }

    const RateFunction& entry(std::size_t i, std::size_t j) const { return entries_.at(i * species_ + j); }
    double operator()(std::size_t i, std::size_t j, double x) const { return entry(i, j)(x); }
    bool all_constant() const;

    TransitionRates with_regime(Regime regime) const;

private:
    std::size_t species_ = 0;
    std::vector<RateFunction> entries_;
    Regime regime_ = Regime::Bounded;
    double lower_bound_k_ = 0.0;
};

struct RateViolation {
    enum class Kind { NonFinite, Negative, DiagonalMismatch, BelowLowerBound, SpeciesCount };
    Kind kind;
    std::size_t i = 0;
    std::size_t j = 0;
    double x = 0.0;
    double expected = 0.0;
    double actual = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<RateViolation> violations;
    bool valid() const noexcept { return violations.empty(); }
};

/// Reports (never throws) every violated rate condition. x-dependent entries are
/// checked on `samples` uniform points of [0, 1].
ValidationReport validate_rates(const TransitionRates& rates, std::size_t samples = 201);

// ---------------------------------------------------------------------------
// Sign regions
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const noexcept { return hi - lo; }
    bool is_point() const noexcept { return hi <= lo; }
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

enum class Region { Positive, Negative, Neutral };

struct RegionDecomposition {
    std::vector<Interval> j_intervals;  ///< min_i psi'_i > tol
    std::vector<Interval> k_intervals;  ///< max_i psi'_i < -tol
    std::vector<Interval> neutral_set;  ///< complement; zero-length entries are isolated points
    double detection_tolerance = 1e-9;

    /// Region of x. A point shared by two intervals gets the region of the interval to its right.
    Region classify(double x) const;
    double j_measure() const;
    double k_measure() const;
};

inline constexpr double kDefaultDetectionTolerance = 1e-9;
inline constexpr double kRegionEndpointTolerance = 1e-10;
inline constexpr double kPointWidth = 1e-8;

RegionDecomposition decompose_regions(const PotentialSet& pot, std::size_t samples,
                                      double detection_tolerance = kDefaultDetectionTolerance);

/// Maximal intervals of [0,1] on which f > tol, endpoints refined by bisection.
template <class F>
std::vector<Interval> positive_intervals(F&& f, std::size_t samples, double tol);

// ---------------------------------------------------------------------------
// Configuration and assumptions
// ---------------------------------------------------------------------------

enum class Normalization { UnitMass, UnitAtOrigin };

std::string to_string(Normalization normalization);
Normalization normalization_from_string(const std::string& name);

struct ModelConfig {
    std::string name;
    PotentialSet potentials;
    TransitionRates rates;
    Normalization normalization = Normalization::UnitAtOrigin;

    std::size_t species_count() const noexcept { return potentials.species_count(); }
    /// Throws InputError when the species counts of potentials and rates differ.
    void check_consistent() const;
};

struct AssumptionReport {
    bool rates_consistent = false;     ///< nu_ii = sum_j nu_ji at every sample
    bool rates_bounded_below = false;  ///< nu_ij >= k > 0 for i != j
    bool potentials_regular = false;   ///< every psi_i is C^{2,1}
    bool positive_region = false;      ///< J nonempty
    bool max_slope_positive = false;   ///< max_i psi'_i > 0 on [0,1]
    bool finite_sign_structure = false;
    bool vanishing_coupling = false;   ///< every species-level negative interval is drained
    bool strong_supported = false;     ///< strong regime needs exactly two species
    std::vector<std::string> vanishing_failures;

    bool min_plus_limit = false;   ///< bounded regime, max slope positive
    bool piecewise_limit = false;  ///< bounded regime, finite sign structure
    bool strong_limit = false;
    bool vanishing_limit = false;

    std::vector<std::string> notes;
};

AssumptionReport check_assumptions(const ModelConfig& config, const RegionDecomposition& regions,
                                   std::size_t samples = 4097);

/// Intervals where psi'_j < -tol, for each species j.
std::vector<std::vector<Interval>> species_negative_intervals(const PotentialSet& pot, std::size_t samples,
                                                              double tol = kDefaultDetectionTolerance);

/// Names of the assumption (21) failures; empty when satisfied.
std::vector<std::string> vanishing_coupling_failures(const ModelConfig& config, std::size_t samples = 4097);

// ---------------------------------------------------------------------------

template <class F>
std::vector<Interval> positive_intervals(F&& f, std::size_t samples, double tol) {
    std::vector<Interval> out;
    if (samples < 2) samples = 2;
    const auto at = [&](std::size_t k) { return static_cast<double>(k) / static_cast<double>(samples - 1); };
    const auto inside = [&](double x) { return f(x) > tol; };
    const auto refine = [&](double a, double b) {
        // inside(a) != inside(b)
        const bool left_in = inside(a);
        while (b - a > kRegionEndpointTolerance) {
            const double m = 0.5 * (a + b);
            if (inside(m) == left_in) a = m; else b = m;
        }
        return 0.5 * (a + b);
    };
    bool in = inside(0.0);
    double start = 0.0;
    for (std::size_t k = 1; k < samples; ++k) {
        const double x0 = at(k - 1);
        const double x1 = at(k);
        const bool now = inside(x1);
        if (now == in) continue;
        const double edge = refine(x0, x1);
        if (in) out.push_back({start, edge});
        else start = edge;
        in = now;
    }
    if (in) out.push_back({start, 1.0});
    return out;
}

}  // namespace motorlab
