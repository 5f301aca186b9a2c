#pragma once

// Verification instruments: observed convergence order, von Neumann roots of the
// amplification polynomial, modified wavenumbers and a compact-vs-FD timing table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jdcompact/errors.hpp"
#include "jdcompact/model.hpp"
#include "jdcompact/operators.hpp"
#include "jdcompact/quadrature.hpp"
#include "jdcompact/solver.hpp"

namespace jdcompact {

/// sqrt(dx * sum v_i^2) over the interior entries of v (first and last dropped).
inline double l2_grid_norm(std::span<const double> v, double dx) {
    if (v.size() < 3) return 0.0;
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i] * v[i];
    return std::sqrt(dx * s);
}

// ---------------------------------------------------------------------------
// Convergence order

struct ConvergenceRow {
    int intervals;
    double dx;
    double dtau;
    double l2_diff;                // || U_N - restrict(U_2N) ||
    std::optional<double> order;   // log2 of the previous ratio; absent on the first row
};

struct ConvergenceReport {
    std::string model;
    std::string contract;
    std::vector<ConvergenceRow> rows;

    std::optional<double> final_order() const {
        if (rows.empty()) return std::nullopt;
        return rows.back().order;
    }
};

inline void check_doubling(std::span<const int> sequence, std::size_t min_length) {
    if (sequence.size() < min_length)
        throw ConfigError("N sequence needs at least " + std::to_string(min_length) + " grids");
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] < 8 || sequence[i] % 2 != 0) throw ConfigError("N values must be even and >= 8");
        if (i > 0 && sequence[i] != 2 * sequence[i - 1]) throw ConfigError("N sequence must double");
    }
}

/// Builds the report from solutions on nested grids (each grid has twice the
/// intervals of the one before). Errors compare coincident nodes only.
inline std::vector<ConvergenceRow> nested_differences(std::span<const GridSpec> grids,
                                                      std::span<const std::vector<double>> solutions) {
    if (grids.size() != solutions.size()) throw std::invalid_argument("grid/solution count mismatch");
    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k + 1 < grids.size(); ++k) {
        const auto& coarse = solutions[k];
        const auto& fine = solutions[k + 1];
        const int N = grids[k].intervals;
        if (grids[k + 1].intervals != 2 * N || coarse.size() != grids[k].size() || fine.size() != grids[k + 1].size())
            throw std::invalid_argument("grids are not nested");
        std::vector<double> diff(coarse.size());
        for (int n = 0; n <= N; ++n) diff[n] = coarse[n] - fine[2 * n];
        ConvergenceRow row{N, grids[k].dx(), grids[k].dtau(), l2_grid_norm(diff, grids[k].dx()), std::nullopt};
        if (!rows.empty()) row.order = std::log2(rows.back().l2_diff / row.l2_diff);
        rows.push_back(row);
    }
    return rows;
}

/// Generic driver: `solve_on(grid)` returns nodal values on that grid.
inline std::vector<ConvergenceRow> estimate_order_with(
    std::span<const int> sequence, double rho, double half_width, double maturity,
    const std::function<std::vector<double>(const GridSpec&)>& solve_on) {
    check_doubling(sequence, 2);
    std::vector<GridSpec> grids;
    std::vector<std::vector<double>> solutions;
    for (int N : sequence) {
        grids.push_back(GridSpec::from_mesh_ratio(half_width, N, maturity, rho));
        solutions.push_back(solve_on(grids.back()));
    }
    return nested_differences(grids, solutions);
}

inline std::string describe(const ModelParams& p) { return p.is_merton() ? "merton" : "kou"; }

inline std::string describe(const Contract& c) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s K=%.12g T=%.12g", to_string(c.side).c_str(), c.strike, c.maturity);
    return buf;
}

/// Self-convergence of the option solver on doubling grids with fixed mesh ratio.
/// A two-grid sequence yields a single difference and no order.
inline ConvergenceReport estimate_order(const ModelParams& params, const Contract& contract,
                                        std::span<const int> sequence, double rho = 0.4,
                                        double half_width = 2.0, const SolveOptions& options = {}) {
    contract.validate();
    ConvergenceReport report{describe(params), describe(contract), {}};
    report.rows = estimate_order_with(sequence, rho, half_width, contract.maturity, [&](const GridSpec& g) {
        return solve(params, contract, g, options).values;
    });
    return report;
}

// ---------------------------------------------------------------------------
// Amplification polynomial  gamma0 p^2 - 2 gamma1 p - gamma2 = 0

struct AmplificationSample {
    double theta = 0.0;
    std::complex<double> gamma0, gamma1, gamma2;
    std::complex<double> p1, p2;
    double bound = 1.0;  // 1 + 2 (r + 2 lambda) dtau
    double dtau = 0.0;
    double rate = 0.0;
    double intensity = 0.0;

    double max_modulus() const { return std::max(std::abs(p1), std::abs(p2)); }

    double residual(std::complex<double> p) const { return std::abs(gamma0 * p * p - 2.0 * gamma1 * p - gamma2); }
};

/// Roots from explicit gammas, with the cancellation-free quadratic formula.
inline AmplificationSample amplification_roots_from(std::complex<double> g0, std::complex<double> g1,
                                                    std::complex<double> g2) {
    if (std::abs(g0) == 0.0) throw NumericalError("amplification polynomial is degenerate");
    AmplificationSample s;
    s.gamma0 = g0;
    s.gamma1 = g1;
    s.gamma2 = g2;
    const std::complex<double> d = std::sqrt(g1 * g1 + g0 * g2);
    const std::complex<double> q = (std::real(std::conj(g1) * d) >= 0.0) ? g1 + d : g1 - d;
    if (std::abs(q) == 0.0) {
        s.p1 = s.p2 = 0.0;
    } else {
        s.p1 = q / g0;
        s.p2 = -g2 / q;
    }
    return s;
}

/// A, B and the gammas for the compact scheme at phase theta; G is the quadrature symbol.
inline AmplificationSample amplification_roots(const SchemeCoefficients& c, const ModelParams& params,
                                               std::complex<double> G, double theta) {
    if (!(c.dx > 0.0) || !(c.dtau > 0.0)) throw ConfigError("dx and dtau must be positive");
    const double cs = std::cos(theta);
    const double A = c.diffusion * (cs * cs + 4.0 * cs - 5.0) / (c.dx * c.dx * (2.0 + cs));
    const double B = c.convection * 3.0 * std::sin(theta) / (c.dx * (2.0 + cs));
    const std::complex<double> AB(A, B);
    const double lambda = params.intensity();
    const double r = params.rate();
    auto s = amplification_roots_from(1.0 - c.dtau * AB, lambda * c.dtau * G - c.dtau * (r + lambda),
                                      1.0 + c.dtau * AB);
    s.theta = theta;
    s.dtau = c.dtau;
    s.rate = r;
    s.intensity = lambda;
    s.bound = 1.0 + 2.0 * (r + 2.0 * lambda) * c.dtau;
    return s;
}

struct RootSeparation {
    bool triggered = false;  // some |p| > 1
    double separation = 0.0; // |p1 - p2|
    double margin = 0.0;     // 2 - 2 dtau (2 lambda + r)
    bool flagged = false;    // margin < 1
    bool ok = true;          // not triggered, or separation >= margin - 1
};

inline RootSeparation root_separation_check(const AmplificationSample& s) {
    RootSeparation out;
    out.separation = std::abs(s.p1 - s.p2);
    out.margin = 2.0 - 2.0 * s.dtau * (2.0 * s.intensity + s.rate);
    out.flagged = out.margin < 1.0;
    out.triggered = s.max_modulus() > 1.0;
    if (out.triggered) out.ok = out.separation >= out.margin - 1.0;
    return out;
}

/// theta_j = -pi + 2 pi (j + 1/2) / count, symmetric and never exactly 0 or pi.
inline std::vector<double> theta_sweep(int count) {
    if (count < 1) return {};
    std::vector<double> t(count);
    for (int j = 0; j < count; ++j) t[j] = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / count;
    return t;
}

struct StabilitySweep {
    std::vector<AmplificationSample> samples;
    double max_excess = -std::numeric_limits<double>::infinity();  // max(|p|) - bound
    double max_residual = 0.0;                                     // relative root residual
};

inline StabilitySweep stability_sweep(const ModelParams& params, const GridSpec& grid, int count = 1024) {
    const JumpConvolutionOperator op(grid, params);
    const auto coeffs = SchemeCoefficients::from(params, grid);
    StabilitySweep sweep;
    for (double theta : theta_sweep(count)) {
        auto s = amplification_roots(coeffs, params, quadrature_symbol(op, theta), theta);
        sweep.max_excess = std::max(sweep.max_excess, s.max_modulus() - s.bound);
        const double scale = std::max(std::abs(s.gamma0), std::abs(s.gamma2));
        sweep.max_residual = std::max({sweep.max_residual, s.residual(s.p1) / scale, s.residual(s.p2) / scale});
        sweep.samples.push_back(s);
    }
    return sweep;
}

/// Grid with the given N and dtau exactly at 1/(4 lambda + 2 r); maturity is one step count worth.
inline GridSpec grid_at_step_limit(const ModelParams& params, double half_width, int N, int steps = 2) {
    const double dt = stable_step_limit(params);
    if (!std::isfinite(dt)) throw ConfigError("step limit is unbounded for lambda = r = 0");
    return {half_width, N, steps, dt * steps};
}

/// max over theta of |G(theta)| for the quadrature on `grid`.
inline double max_symbol_modulus(const ModelParams& params, const GridSpec& grid, int count = 1024) {
    const JumpConvolutionOperator op(grid, params);
    double m = 0.0;
    for (double theta : theta_sweep(count)) m = std::max(m, std::abs(quadrature_symbol(op, theta)));
    return m;
}

// ---------------------------------------------------------------------------
// Modified wavenumbers, per unit dx

struct WavenumberCurve {
    std::vector<double> theta;
    std::vector<double> exact_first;    // theta
    std::vector<double> exact_second;   // theta^2
    std::vector<double> fd_first;       // sin theta
    std::vector<double> fd_second;      // 2 - 2 cos theta
    std::vector<double> compact_first;  // 3 sin theta / (2 + cos theta)
    std::vector<double> compact_second; // 2 (2 - 2 cos theta) - sin theta * compact_first
};

inline double compact_first_wavenumber(double t) { return 3.0 * std::sin(t) / (2.0 + std::cos(t)); }

inline double compact_second_wavenumber(double t) {
    return 2.0 * (2.0 - 2.0 * std::cos(t)) - std::sin(t) * compact_first_wavenumber(t);
}

inline WavenumberCurve wavenumber_curves(std::span<const double> thetas) {
    WavenumberCurve c;
    for (double t : thetas) {
        if (!(t > 0.0 && t <= std::numbers::pi)) throw ConfigError("wavenumber phase must lie in (0, pi]");
        c.theta.push_back(t);
        c.exact_first.push_back(t);
        c.exact_second.push_back(t * t);
        c.fd_first.push_back(std::sin(t));
        c.fd_second.push_back(2.0 - 2.0 * std::cos(t));
        c.compact_first.push_back(compact_first_wavenumber(t));
        c.compact_second.push_back(compact_second_wavenumber(t));
    }
    return c;
}

/// count phases uniformly on (0, pi], ending at pi.
inline std::vector<double> wavenumber_grid(int count) {
    std::vector<double> t;
    for (int j = 1; j <= count; ++j) t.push_back(std::numbers::pi * j / count);
    return t;
}

// ---------------------------------------------------------------------------
// Efficiency

struct EfficiencyRow {
    Scheme scheme;
    int intervals;
    double error;         // l2 against the Merton series on the window
    double wall_seconds;  // median over repeats
};

struct TargetReach {
    double target;
    Scheme scheme;
    std::optional<int> intervals;       // smallest N reaching the target
    std::optional<double> wall_seconds;
};

struct EfficiencyReport {
    std::vector<EfficiencyRow> rows;
    std::vector<TargetReach> reach;
};

/// l2 error against the analytic Merton price over interior nodes with |x| <= window.
inline double analytic_error(const SolveResult& result, const Contract& contract, double window) {
    const auto& g = result.grid;
    double s = 0.0;
    for (int n = 1; n < g.intervals; ++n) {
        const double x = g.x(n);
        if (std::abs(x) > window) continue;
        const double ref = merton_series_price(contract, result.params, contract.spot_anchor * std::exp(x));
        const double d = result.values[n] - ref;
        s += d * d;
    }
    return std::sqrt(g.dx() * s);
}

/// Both schemes on every N; an empty target list gives an empty report.
inline EfficiencyReport efficiency_comparison(const ModelParams& params, const Contract& contract,
                                              std::span<const int> intervals, std::span<const double> targets,
                                              double rho = 0.4, double half_width = 2.0, double window = 1.0,
                                              int repeats = 3, SolveOptions options = {}) {
    if (!params.is_merton()) throw ConfigError("efficiency comparison needs the Merton analytic price");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (!(window > 0.0)) throw ConfigError("error window must be positive");
    EfficiencyReport report;
    if (targets.empty()) return report;
    std::vector<int> Ns(intervals.begin(), intervals.end());
    std::sort(Ns.begin(), Ns.end());
    for (Scheme scheme : {Scheme::Compact, Scheme::SecondOrder}) {
        options.scheme = scheme;
        for (int N : Ns) {
            const auto grid = GridSpec::from_mesh_ratio(half_width, N, contract.maturity, rho);
            std::vector<double> times;
            std::optional<SolveResult> last;
            for (int k = 0; k < repeats; ++k) {
                last = solve(params, contract, grid, options);
                times.push_back(last->wall_seconds);
            }
            std::sort(times.begin(), times.end());
            report.rows.push_back({scheme, N, analytic_error(*last, contract, window), times[times.size() / 2]});
        }
        for (double target : targets) {
            TargetReach t{target, scheme, std::nullopt, std::nullopt};
            for (const auto& row : report.rows) {
                if (row.scheme != scheme || row.error > target) continue;
                t.intervals = row.intervals;
                t.wall_seconds = row.wall_seconds;
                break;
            }
            report.reach.push_back(t);
        }
    }
    return report;
}

}  // namespace jdcompact
