#pragma once

// Fourth-order smoothing of kinked initial data.
//
// The smoothing kernel is given through its Fourier transform
//
//   phi4_hat(w) = (sin(w/2) / (w/2))^4 * (1 + 2/3 sin^2(w/2)).
//
// The first factor is the transform of the centred cubic B-spline M4 (support
// [-2, 2]); since sin^2(w/2) = (1 - cos w)/2 and cos w shifts by +-1,
//
//   phi4(s) = 4/3 M4(s) - 1/6 (M4(s - 1) + M4(s + 1)),   supported on [-3, 3].
//
// phi4 integrates to one and has a vanishing second moment, so it reproduces
// cubics exactly and perturbs smooth data by O(dx^4).

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jdcompact/errors.hpp"
#include "jdcompact/operators.hpp"

namespace jdcompact {

inline double phi4_hat(double w) {
    if (w == 0.0) return 1.0;
    const double half = 0.5 * w;
    const double s = std::sin(half);
    const double sinc = s / half;
    return sinc * sinc * sinc * sinc * (1.0 + 2.0 / 3.0 * s * s);
}

/// Centred cubic B-spline, support [-2, 2].
inline double cubic_bspline(double s) {
    const double a = std::abs(s);
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) {
        const double t = 2.0 - a;
        return t * t * t / 6.0;
    }
    return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

inline double phi4(double s) {
    return 4.0 / 3.0 * cubic_bspline(s) - (cubic_bspline(s - 1.0) + cubic_bspline(s + 1.0)) / 6.0;
}

class SmoothingKernel {
public:
    static constexpr double support = 3.0;

    /// Tabulates phi4 on [-3, 3] with `resolution` samples per unit.
    explicit SmoothingKernel(int resolution) : resolution_(resolution) {
        if (resolution < 64) throw ConfigError("smoothing kernel resolution must be >= 64");
        const int count = static_cast<int>(2 * support) * resolution + 1;
        table_.resize(count);
        const double h = 1.0 / resolution;
        for (int j = 0; j < count; ++j) table_[j] = phi4(-support + j * h);
        double sum = 0.5 * (table_.front() + table_.back());
        for (int j = 1; j + 1 < count; ++j) sum += table_[j];
        normalization_ = sum * h;
        if (std::abs(normalization_ - 1.0) > 1e-8)
            throw ConfigError("smoothing kernel resolution too low to normalise");
    }

    int resolution() const { return resolution_; }
    double normalization() const { return normalization_; }
    std::span<const double> table() const { return table_; }
    double sample_position(std::size_t j) const { return -support + static_cast<double>(j) / resolution_; }

    double operator()(double s) const { return std::abs(s) >= support ? 0.0 : phi4(s); }

private:
    int resolution_;
    double normalization_ = 0.0;
    std::vector<double> table_;
};

inline SmoothingKernel build_kernel(int resolution = 256) { return SmoothingKernel(resolution); }

/// Nodes with |x_n - kink| <= 3 dx, i.e. the ones whose smoothing window sees the kink.
inline std::vector<int> smoothing_window(const GridSpec& grid, double kink) {
    std::vector<int> nodes;
    const double reach = SmoothingKernel::support * grid.dx() * (1.0 + 1e-12);
    for (int n = 0; n <= grid.intervals; ++n)
        if (std::abs(grid.x(n) - kink) <= reach) nodes.push_back(n);
    return nodes;
}

/// (1/dx) int_{-3dx}^{3dx} phi4(x/dx) u0(x_n - x) dx at each requested node.
/// The integral is split at the kernel knots and at the payoff kink, then each
/// piece is integrated by 20-point Gauss-Legendre.
template <class Payoff>
std::vector<double> smooth_initial_condition(const SmoothingKernel& kernel, Payoff&& u0,
                                             const GridSpec& grid, std::span<const int> nodes,
                                             double kink) {
    using boost::math::quadrature::gauss;
    const double dx = grid.dx();
    std::vector<double> out;
    out.reserve(nodes.size());
    for (int n : nodes) {
        if (n < 3 || n > grid.intervals - 3)
            throw std::out_of_range("smoothing node " + std::to_string(n) + " is too close to the boundary");
        const double xn = grid.x(n);
        std::vector<double> breaks;
        for (int k = -3; k <= 3; ++k) breaks.push_back(k);
        const double s_kink = (xn - kink) / dx;
        if (s_kink > -3.0 && s_kink < 3.0) breaks.push_back(s_kink);
        std::sort(breaks.begin(), breaks.end());
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = breaks[i];
            const double b = breaks[i + 1];
            if (b - a < 1e-14) continue;
            total += gauss<double, 20>::integrate(
                [&](double s) { return kernel(s) * u0(xn - s * dx); }, a, b);
        }
        out.push_back(total);
    }
    return out;
}

/// Replaces the values near the kink by their smoothed counterparts.
template <class Payoff>
void apply_smoothing(const SmoothingKernel& kernel, Payoff&& u0, const GridSpec& grid,
                     std::span<double> values, double kink) {
    std::vector<int> nodes = smoothing_window(grid, kink);
    nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                               [&](int n) { return n < 3 || n > grid.intervals - 3; }),
                nodes.end());
    const auto smoothed = smooth_initial_condition(kernel, u0, grid, nodes, kink);
    for (std::size_t i = 0; i < nodes.size(); ++i) values[nodes[i]] = smoothed[i];
}

}  // namespace jdcompact
