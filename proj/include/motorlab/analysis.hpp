#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "motorlab/fields.hpp"
#include "motorlab/hj_limit.hpp"
#include "motorlab/model.hpp"
#include "motorlab/phase.hpp"
#include "motorlab/steady_solver.hpp"

namespace motorlab {

inline constexpr double kDefaultEpsilon = 0.05;
inline constexpr double kMotorEffectThreshold = 0.01;

struct ConcentrationReport {
    double epsilon = kDefaultEpsilon;
    std::vector<double> masses_near_zero;  ///< per species, int_0^eps n_i
    std::vector<double> rho_estimates;     ///< same values; the weights of the limiting point mass
    double total_far_mass = 0.0;           ///< int_eps^1 sum_i n_i
    bool motor_effect = false;             ///< total_far_mass <= 0.01
};

/// Trapezoidal masses under unit total mass; a density with another normalization is rescaled
/// first. The cell containing epsilon is split at the linearly interpolated value.
ConcentrationReport concentration_masses(const DensityField& density, double epsilon = kDefaultEpsilon);

/// Same report computed from phases, valid when e^{-R/sigma} underflows.
ConcentrationReport concentration_from_phase(const PhaseField& phase, double epsilon = kDefaultEpsilon);

/// The limit a config's assumptions select, if any.
struct ApplicableLimit {
    std::string theorem;  ///< "min-plus", "piecewise", "strong", "vanishing" or "" for none
    std::optional<LimitProfile> profile;
    std::optional<BoundCertificate> certificate;
    std::optional<VanishingBounds> vanishing;
    AssumptionReport assumptions;
    RegionDecomposition regions;
};

ApplicableLimit applicable_limit(const ModelConfig& config, const Grid& grid);

struct ConvergenceRow {
    double sigma = 0.0;
    std::string path;
    std::vector<double> errors;  ///< per species, max |R_i - R_i(0) - R|
    std::vector<double> gaps;    ///< int (R_i - R_j)^2 for i < j, lexicographic
    double far_mass = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;       ///< descending sigma
    std::optional<double> rate;             ///< least-squares slope of log(max error) against log(sigma)
    std::string rate_note;                  ///< why `rate` is absent
    std::optional<std::string> failure;     ///< solver failure that truncated the table
    double failed_sigma = 0.0;
};

/// Solves along `sigmas` by continuation and compares every entry with `limit`.
ConvergenceTable convergence_study(const ModelConfig& config, const Grid& grid, const std::vector<double>& sigmas,
                                   const LimitProfile& limit, double epsilon = kDefaultEpsilon,
                                   const SweepOptions& options = {});

/// Table rows from an existing sweep.
ConvergenceTable convergence_table(const SweepResult& sweep, const LimitProfile& limit,
                                   double epsilon = kDefaultEpsilon);
/// Same without a limit: error columns stay empty, gaps and far mass are filled in.
ConvergenceTable convergence_table(const SweepResult& sweep, double epsilon = kDefaultEpsilon);

struct IntervalCondition {
    Interval k_interval;
    std::optional<Interval> j_interval;  ///< the nearest J interval to the left
    double k_integral = 0.0;             ///< int_K max_i psi_i'
    double j_integral = 0.0;             ///< int_J min_i psi_i'
    bool holds = false;                  ///< |k_integral| < j_integral
};

struct ConditionReport {
    std::vector<IntervalCondition> piecewise;  ///< one entry per K interval
    bool piecewise_holds = false;
    bool same_interval_count = false;  ///< as many J as K intervals
    double strong_lhs = 0.0;           ///< sqrt(k) |(union J)^c|
    double strong_rhs = 0.0;           ///< int over union J of min_i psi_i'
    bool strong_holds = false;
    bool zero_starts_j = false;        ///< 0 is the left endpoint of J_1
    bool min_slope_positive_at_zero = false;
};

/// Adaptive quadrature to 1e-10.
ConditionReport check_corollary_conditions(const PotentialSet& pot, const RegionDecomposition& regions,
                                           const TransitionRates& rates);

/// Per species: excess of min_x R_i over the overall minimum, in units of sigma, along a sweep.
struct BlowUpReport {
    std::vector<double> sigmas;
    std::vector<std::vector<double>> excess;  ///< [entry][species], (min R_i - min_j min R_j) / sigma
    std::vector<bool> blowing_up;             ///< per species
};

/// Flags species whose excess grows along the last three entries and ends above 2 ln(1/sigma).
/// Empirical only: nothing predicts which species should vanish.
BlowUpReport detect_blow_up(const SweepResult& sweep);

struct MotorEffectReport {
    std::string config_name;
    Regime regime = Regime::Bounded;
    double sigma = 0.0;
    std::size_t cells = 0;
    std::string path;
    double solver_residual = 0.0;
    bool trusted = true;
    ConcentrationReport concentration;
    BoundReport flux_bounds;
    GapReport gaps;
    PhaseResidual residual;
    GradientBound gradient;
    double sandwich = 0.0;
    AssumptionReport assumptions;
    ConditionReport conditions;
    std::string theorem;
    std::optional<std::vector<double>> limit_errors;       ///< per species, when a profile exists
    /// Per species, computed slopes against the strong-limit bounds with slope_tolerance.
    std::optional<std::vector<BoundCertificate>> strong_certificates;
    std::optional<VanishingCheck> vanishing_check;  ///< derivative tolerance 10 h
    std::optional<BlowUpReport> blow_up;
    /// Everything behind the final solve, for plotting.
    SweepEntry solution;
    std::optional<LimitProfile> limit;
};

/// Solve at sigma_final by continuation, then evaluate every diagnostic that applies.
MotorEffectReport motor_effect_report(const ModelConfig& config, const Grid& grid, double sigma_final,
                                      double epsilon = kDefaultEpsilon);

/// Derivative tolerance used against limit bounds on a grid: 10 h + 0.01.
double slope_tolerance(const Grid& grid);

/// N = max(512, ceil(8 / sigma_min)).
std::size_t contract_cells(double sigma_min);

}  // namespace motorlab
