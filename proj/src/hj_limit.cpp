#include "motorlab/hj_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "motorlab/errors.hpp"
#include "motorlab/phase.hpp"

namespace motorlab {

std::string to_string(Branch branch) {
    switch (branch) {
        case Branch::MinPlus: return "min_plus";
        case Branch::MaxNeg: return "max_neg";
        case Branch::Zero: return "zero";
        case Branch::StrongRoot: return "strong_root";
        case Branch::VanishingBound: return "vanishing_bound";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t region_samples(const Grid& grid) { return std::max<std::size_t>(4097, 4 * grid.cells + 1); }

double branch_slope(const PotentialSet& pot, Region region, double x) {
    switch (region) {
        case Region::Positive: return std::max(pot.min_slope(x), 0.0);
        case Region::Negative: return pot.max_slope(x);
        case Region::Neutral: return 0.0;
    }
    return 0.0;
}

Branch label_of(Region region) {
    switch (region) {
        case Region::Positive: return Branch::MinPlus;
        case Region::Negative: return Branch::MaxNeg;
        case Region::Neutral: return Branch::Zero;
    }
    return Branch::Zero;
}

// Integral of slope(x) over [a, b], 3-point Gauss on each piece between breakpoints.
template <class F>
double gauss_integral(F&& slope, double a, double b, const std::vector<double>& breaks) {
    static const double node = std::sqrt(0.6);
    static const double w0 = 8.0 / 9.0, w1 = 5.0 / 9.0;
    const auto piece = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        return half * (w0 * slope(c, c) + w1 * (slope(c - half * node, c) + slope(c + half * node, c)));
    };
    double total = 0.0;
    double lo = a;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
    for (; it != breaks.end() && *it < b; ++it) {
        total += piece(lo, *it);
        lo = *it;
    }
    return total + piece(lo, b);
}

std::vector<double> breakpoints(const RegionDecomposition& regions) {
    std::vector<double> out;
    for (const auto* list : {&regions.j_intervals, &regions.k_intervals, &regions.neutral_set})
        for (const auto& iv : *list) {
            out.push_back(iv.lo);
            out.push_back(iv.hi);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LimitProfile build_profile(const PotentialSet& pot, const RegionDecomposition& regions, const Grid& grid,
                           bool three_branch) {
    LimitProfile prof;
    prof.grid = grid;
    prof.theorem = three_branch ? "piecewise" : "min-plus";
    const std::size_t nodes = grid.size();
    prof.r.assign(nodes, 0.0);
    prof.slope.resize(nodes);
    prof.labels.resize(nodes);
    // Without the three-branch display every point uses (min psi')_+.
    const auto region_at = [&](double x) { return three_branch ? regions.classify(x) : Region::Positive; };
    for (std::size_t m = 0; m < nodes; ++m) {
        const double x = grid.nodes[m];
        const Region reg = region_at(x);
        prof.slope[m] = branch_slope(pot, reg, x);
        prof.labels[m] = three_branch ? label_of(reg) : Branch::MinPlus;
    }
    const auto breaks = breakpoints(regions);
    // the region is fixed per piece by its midpoint, so junction points never mix branches
    const auto slope = [&](double x, double mid) { return branch_slope(pot, region_at(mid), x); };
    for (std::size_t m = 1; m < nodes; ++m)
        prof.r[m] = prof.r[m - 1] + gauss_integral(slope, grid.nodes[m - 1], grid.nodes[m], breaks);
    return prof;
}

void check_regions(const PotentialSet& pot, const RegionDecomposition& regions, const Grid& grid) {
    const auto check_list = [](const std::vector<Interval>& list, const char* name) {
        double last = -kInf;
        for (const auto& iv : list) {
            if (!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi && iv.lo >= last)) {
                std::ostringstream msg;
                msg << "region decomposition: " << name << " intervals are not sorted inside [0, 1]";
                throw InputError(msg.str());
            }
            last = iv.hi;
        }
    };
    check_list(regions.j_intervals, "J");
    check_list(regions.k_intervals, "K");
    check_list(regions.neutral_set, "neutral");
    const double guard = 1e-8;
    for (double x : grid.nodes) {
        const auto inside = [&](const std::vector<Interval>& list) {
            for (const auto& iv : list)
                if (x > iv.lo + guard && x < iv.hi - guard) return true;
            return false;
        };
        if ((inside(regions.j_intervals) && !(pot.min_slope(x) > 0.0)) ||
            (inside(regions.k_intervals) && !(pot.max_slope(x) < 0.0))) {
            std::ostringstream msg;
            msg << "region decomposition does not match the potentials at x = " << x;
            throw InputError(msg.str());
        }
    }
}

}  // namespace

LimitProfile limit_bounded(const PotentialSet& pot, const Grid& grid, const AssumptionReport& certificate) {
    if (!certificate.min_plus_limit)
        throw InputError("min-plus limit needs the bounded-regime assumptions with max_i psi_i' > 0");
    return build_profile(pot, decompose_regions(pot, region_samples(grid)), grid, false);
}

LimitProfile limit_piecewise(const PotentialSet& pot, const RegionDecomposition& regions, const Grid& grid,
                             const AssumptionReport& certificate) {
    if (!certificate.piecewise_limit)
        throw InputError("piecewise limit needs the bounded-regime assumptions with a finite sign structure");
    check_regions(pot, regions, grid);
    return build_profile(pot, regions, grid, true);
}

// ---------------------------------------------------------------------------

namespace {

// b1 b2 - nu1 nu2 = p (p^3 + c2 p^2 + c1 p + c0), expanded so that it vanishes exactly at p = 0.
struct Cubic {
    double c2, c1, c0;
};

Cubic deflated(const HamiltonianParams& q) {
    const double a = q.psi1_slope, b = q.psi2_slope;
    return {-(a + b), a * b - q.nu1 - q.nu2, a * q.nu2 + b * q.nu1};
}

double quartic(double p, const HamiltonianParams& q) {
    const auto c = deflated(q);
    return p * (((p + c.c2) * p + c.c1) * p + c.c0);
}

double quartic_derivative(double p, const HamiltonianParams& q) {
    const auto c = deflated(q);
    return ((4.0 * p + 3.0 * c.c2) * p + 2.0 * c.c1) * p + c.c0;
}

}  // namespace

double effective_hamiltonian(double p, const HamiltonianParams& q) {
    const double b1 = p * p - q.psi1_slope * p - q.nu1;
    const double b2 = p * p - q.psi2_slope * p - q.nu2;
    const double sum = b1 + b2;
    // (b1 + b2)^2 - 4 (b1 b2 - nu1 nu2) rewritten as a sum of squares
    const double root = std::sqrt((b1 - b2) * (b1 - b2) + 4.0 * q.nu1 * q.nu2);
    if (sum >= 0.0) return 0.5 * (sum + root);
    // conjugate form avoids the cancellation sum + root
    return 2.0 * quartic(p, q) / (sum - root);
}

double hamiltonian_lipschitz(double p, double radius, const HamiltonianParams& q) {
    // |H'| <= max_i |b_i'| with b_i' = 2p - psi_i'
    double worst = 0.0;
    for (double end : {p - radius, p + radius})
        for (double s : {q.psi1_slope, q.psi2_slope}) worst = std::max(worst, std::abs(2.0 * end - s));
    return worst;
}

std::vector<double> solve_ham_roots(const HamiltonianParams& q) {
    // p = 0 is always a root; the rest are eigenvalues of the companion matrix of the cubic factor.
    const auto c = deflated(q);
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = -c.c0;
    companion(1, 2) = -c.c1;
    companion(2, 2) = -c.c2;
    const Eigen::EigenSolver<Eigen::Matrix3d> eig(companion, false);

    const double scale = 1.0 + std::abs(q.psi1_slope) + std::abs(q.psi2_slope) + std::sqrt(q.nu1 + q.nu2);
    std::vector<double> candidates{0.0};
    for (int k = 0; k < 3; ++k) {
        const auto z = eig.eigenvalues()[k];
        if (std::abs(z.imag()) > 1e-9 * (1.0 + std::abs(z.real()))) continue;
        double p = z.real();
        for (int polish = 0; polish < 2; ++polish) {
            const double d = quartic_derivative(p, q);
            if (d == 0.0) break;
            p -= quartic(p, q) / d;
        }
        if (std::abs(p) <= 1e-12 * scale) p = 0.0;
        candidates.push_back(p);
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<double> roots;
    for (double p : candidates) {
        if (!roots.empty() && std::abs(p - roots.back()) <= 1e-10 * (1.0 + std::abs(p))) continue;
        const double b1 = p * p - q.psi1_slope * p - q.nu1;
        const double b2 = p * p - q.psi2_slope * p - q.nu2;
        if (b1 + b2 > 1e-12 * scale * scale) continue;
        roots.push_back(p);
    }
    return roots;
}

HamiltonianParams hamiltonian_params(const ModelConfig& config, double x) {
    HamiltonianParams q;
    q.psi1_slope = config.potentials[0].slope(x);
    q.psi2_slope = config.potentials[1].slope(x);
    q.nu1 = config.rates(1, 0, x);  // loss of species 1 = feed of species 2
    q.nu2 = config.rates(0, 1, x);
    return q;
}

namespace {

void require_strong_pair(const ModelConfig& config) {
    if (config.species_count() != 2)
        throw UnsupportedConfigError("the strong-coupling limit is only available for two species");
    if (config.rates.regime() != Regime::Strong)
        throw UnsupportedConfigError("the strong-coupling limit needs regime 'strong'");
}

double required_bound(const RegionDecomposition& regions, const PotentialSet& pot, double k, double x) {
    return regions.classify(x) == Region::Positive ? pot.min_slope(x) : -std::sqrt(k);
}

}  // namespace

BoundCertificate certify_strong_slopes(const ModelConfig& config, const RegionDecomposition& regions,
                                       const Grid& grid, const std::vector<double>& slope, double tol) {
    require_strong_pair(config);
    if (slope.size() != grid.size()) throw InputError("slope array does not match the grid");
    BoundCertificate cert;
    cert.k = config.rates.lower_bound_k();
    const std::size_t nodes = grid.size();
    cert.required.resize(nodes);
    cert.margin.resize(nodes);
    cert.display_bound.assign(nodes, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t m = 0; m < nodes; ++m) {
        const double x = grid.nodes[m];
        cert.required[m] = required_bound(regions, config.potentials, cert.k, x);
        cert.margin[m] = slope[m] - cert.required[m];
        if (cert.margin[m] < -tol) cert.violations.push_back(m);

        const auto q = hamiltonian_params(config, x);
        bool literal_fails = false;
        double display = -kInf;
        for (const auto& [s, nu] : {std::pair{q.psi1_slope, q.nu1}, std::pair{q.psi2_slope, q.nu2}}) {
            if (!(s > 0.0)) continue;
            display = std::max(display, 0.5 * (s - std::sqrt(s * s + 4.0 * nu)));
            if (slope[m] < std::sqrt(nu)) literal_fails = true;
        }
        if (display > -kInf) {
            cert.display_bound[m] = display;
            if (slope[m] < display - tol - 1e-12 * (1.0 + std::abs(display))) cert.display_violations.push_back(m);
        }
        if (literal_fails) ++cert.literal_display_failures;
    }
    return cert;
}

StrongLimit limit_strong(const ModelConfig& config, const RegionDecomposition& regions, const Grid& grid) {
    require_strong_pair(config);
    const double k = config.rates.lower_bound_k();
    const std::size_t nodes = grid.size();
    StrongLimit out;
    auto& prof = out.profile;
    prof.grid = grid;
    prof.theorem = "strong";
    prof.r.assign(nodes, 0.0);
    prof.slope.resize(nodes);
    prof.labels.assign(nodes, Branch::StrongRoot);

    for (std::size_t m = 0; m < nodes; ++m) {
        const double x = grid.nodes[m];
        const auto roots = solve_ham_roots(hamiltonian_params(config, x));
        const double bound = required_bound(regions, config.potentials, k, x);
        std::vector<double> feasible;
        for (double p : roots)
            if (p >= bound - 1e-9 * (1.0 + std::abs(bound))) feasible.push_back(p);
        const auto& pool = feasible.empty() ? roots : feasible;  // empty pool shows up in the certificate
        const double target = m == 0 ? 0.0 : prof.slope[m - 1];
        prof.slope[m] = *std::min_element(pool.begin(), pool.end(), [&](double a, double b) {
            return std::abs(a - target) < std::abs(b - target);
        });
    }
    for (std::size_t m = 1; m < nodes; ++m)
        prof.r[m] = prof.r[m - 1] + 0.5 * grid.h * (prof.slope[m - 1] + prof.slope[m]);
    out.certificate = certify_strong_slopes(config, regions, grid, prof.slope);
    return out;
}

// ---------------------------------------------------------------------------

VanishingBounds limit_vanishing_bounds(const ModelConfig& config, const Grid& grid) {
    if (config.rates.regime() != Regime::Vanishing) throw InputError("vanishing bounds need regime 'vanishing'");
    const auto failures = vanishing_coupling_failures(config);
    if (!failures.empty()) {
        std::ostringstream msg;
        msg << "vanishing-coupling assumption fails:";
        for (const auto& f : failures) msg << " " << f << ";";
        throw InputError(msg.str());
    }
    const auto& pot = config.potentials;
    const std::size_t samples = region_samples(grid);
    const auto negative = species_negative_intervals(pot, samples);
    const auto regions = decompose_regions(pot, samples);

    VanishingBounds out;
    out.grid = grid;
    const std::size_t nodes = grid.size();
    for (std::size_t i = 0; i < pot.species_count(); ++i) {
        SignConstraint c;
        c.lower.assign(nodes, 0.0);
        c.upper.assign(nodes, kInf);
        c.negative_set.assign(nodes, false);
        for (std::size_t m = 0; m < nodes; ++m) {
            const double x = grid.nodes[m];
            for (const auto& iv : negative[i])
                if (iv.contains(x)) c.negative_set[m] = true;
            // R_i is a subsolution of |R'|^2 - psi_i' R' <= 0, so R_i' lies between 0 and psi_i':
            // the lower end is 0 off K_i and psi_i' on K_i.
            if (c.negative_set[m]) c.lower[m] = pot[i].slope(x);
        }
        out.species.push_back(std::move(c));
    }
    out.j_target.assign(nodes, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t m = 0; m < nodes; ++m)
        if (regions.classify(grid.nodes[m]) == Region::Positive) out.j_target[m] = pot.min_slope(grid.nodes[m]);
    return out;
}

bool VanishingCheck::ok() const noexcept {
    for (auto n : violation_counts)
        if (n != 0) return false;
    return true;
}

VanishingCheck check_vanishing(const PhaseField& phase, const VanishingBounds& bounds, double tol) {
    if (phase.species() != bounds.species.size() || phase.grid.size() != bounds.grid.size())
        throw InputError("phase field does not match the vanishing bounds");
    const std::size_t nodes = phase.grid.size();
    VanishingCheck out;
    for (std::size_t i = 0; i < phase.species(); ++i) {
        const auto d = grid_derivative(phase.r[i], phase.grid.h);
        const auto& c = bounds.species[i];
        double worst = -kInf;
        std::size_t count = 0;
        for (std::size_t m = 0; m < nodes; ++m) {
            const double excess = std::max(c.lower[m] - d[m], d[m] - c.upper[m]) - tol;
            worst = std::max(worst, excess);
            if (excess > 0.0) ++count;
        }
        out.worst_excess.push_back(worst);
        out.violation_counts.push_back(count);
    }
    std::vector<double> lowest(nodes, kInf);
    for (const auto& row : phase.r)
        for (std::size_t m = 0; m < nodes; ++m) lowest[m] = std::min(lowest[m], row[m]);
    const auto d = grid_derivative(lowest, phase.grid.h);
    for (std::size_t m = 0; m < nodes; ++m)
        if (!std::isnan(bounds.j_target[m])) out.j_deviation = std::max(out.j_deviation, std::abs(d[m] - bounds.j_target[m]));
    return out;
}

// ---------------------------------------------------------------------------

HjResidual hj_residual(const LimitProfile& profile, const PotentialSet& pot) {
    HjResidual out;
    const std::size_t nodes = profile.grid.size();
    out.values.resize(nodes);
    for (std::size_t m = 0; m < nodes; ++m) {
        const double x = profile.grid.nodes[m];
        const double p = profile.slope[m];
        double hamiltonian = -kInf;
        for (const auto& psi : pot.potentials()) hamiltonian = std::max(hamiltonian, -psi.slope(x) * p);
        const double value = p * p + hamiltonian;
        out.values[m] = value;
        const bool junction = (m > 0 && profile.labels[m - 1] != profile.labels[m]) ||
                              (m + 1 < nodes && profile.labels[m + 1] != profile.labels[m]);
        auto& slot = junction ? out.max_junction : out.max_interior;
        slot = std::max(slot, std::abs(value));
        out.max_all = std::max(out.max_all, std::abs(value));
    }
    return out;
}

}  // namespace motorlab
