#include "motorlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace motorlab {

double log_sum_exp(const std::vector<double>& a) {
    if (a.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(a.begin(), a.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double v : a) sum += std::exp(v - top);
    return top + std::log(sum);
}

std::vector<double> total_phase(const std::vector<std::vector<double>>& r, double sigma) {
    if (r.empty()) return {};
    const std::size_t nodes = r.front().size();
    std::vector<double> s(nodes);
    std::vector<double> terms(r.size());
    for (std::size_t m = 0; m < nodes; ++m) {
        for (std::size_t i = 0; i < r.size(); ++i) terms[i] = -r[i][m] / sigma;
        s[m] = -sigma * log_sum_exp(terms);
    }
    return s;
}

PhaseField make_phase_field(const Grid& grid, double sigma, std::vector<std::vector<double>> r) {
    PhaseField p;
    p.grid = grid;
    p.sigma = sigma;
    p.s = total_phase(r, sigma);
    p.r = std::move(r);
    return p;
}

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) sum += f[k];
    return sum * h;
}

}  // namespace motorlab
