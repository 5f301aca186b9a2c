#pragma once

// Three-time-level compact scheme for the jump-diffusion PIDE.
//
// With a = sigma^2/2, b = r - sigma^2/2 - lambda*zeta and the compact second
// derivative u_xx = 2 D2 u - D1 u_x, each step solves
//
//   (I - 2 a dt D2) U^{m+1} = dt (b - a D1) Ux^{m+1}
//                           + U^{m-1} + dt [2a D2 U^{m-1} + (b - a D1) Ux^{m-1}]
//                           + 2 dt (J U^m - (r + lambda) U^m)
//
// where Ux are compact first derivatives and J is the Simpson/FFT jump integral
// with its exterior tail. Ux^{m+1} is resolved by correcting to convergence:
// solve with the current guess, recompute Ux from the result, repeat until the
// sup-norm update falls below epsilon. The matrix on the left never changes.
//
// Level 1 comes from one implicit-explicit Euler step (differential part
// implicit, jump and reaction explicit) with the same inner iteration.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jdcompact/errors.hpp"
#include "jdcompact/model.hpp"
#include "jdcompact/operators.hpp"
#include "jdcompact/quadrature.hpp"
#include "jdcompact/smoothing.hpp"

namespace jdcompact {

enum class Scheme {
    Compact,      // fourth-order compact scheme
    SecondOrder,  // central differences, same time stepping; reference only
};

inline std::string to_string(Scheme s) { return s == Scheme::Compact ? "compact" : "fd2"; }

struct SolveOptions {
    bool smoothing = true;
    double epsilon = 1e-12;
    int max_iter = 100;
    Scheme scheme = Scheme::Compact;
    int kernel_resolution = 256;
};

struct SchemeCoefficients {
    double diffusion;   // a
    double convection;  // b
    double reaction;    // r + lambda
    double dtau;
    double dx;

    static SchemeCoefficients from(const ModelParams& p, const GridSpec& g) {
        SchemeCoefficients c{p.diffusion(), p.convection(), p.reaction(), g.dtau(), g.dx()};
        if (!(c.diffusion > 0.0) || !std::isfinite(c.convection) || !std::isfinite(c.reaction))
            throw ConfigError("invalid scheme coefficients");
        return c;
    }
};

/// Largest step with guaranteed von Neumann stability, 1/(4 lambda + 2 r).
inline double stable_step_limit(const ModelParams& p) {
    const double d = 4.0 * p.intensity() + 2.0 * p.rate();
    return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
}

/// Exterior tail per interior node, separable in time:
///   tail_n(tau) = time_factor(tau) * scaled[n] + fixed[n].
struct SeparableTail {
    std::function<double(double)> time_factor;
    std::vector<double> scaled;
    std::vector<double> fixed;

    void evaluate(double tau, std::span<double> out) const {
        if (scaled.empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const double f = time_factor ? time_factor(tau) : 1.0;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * scaled[i] + fixed[i];
    }
};

/// Everything the time stepper needs besides the model: initial data, Dirichlet
/// data at x_0 and x_N, the exterior tail and an optional source term.
struct PideProblem {
    std::function<double(double)> initial;
    std::function<double(double, double)> boundary;  // (x, tau)
    SeparableTail tail;                              // empty: no tail
    std::function<double(double, double)> source;    // optional
    std::optional<double> kink;                      // where smoothing applies
};

inline PideProblem option_problem(const ModelParams& params, const Contract& contract,
                                  const GridSpec& grid) {
    PideProblem p;
    p.initial = [contract](double x) { return payoff(contract, x); };
    p.boundary = [contract, params](double x, double tau) {
        return boundary_value(contract, params, x, tau);
    };
    const int N = grid.intervals;
    const double L = grid.half_width;
    const double r = params.rate();
    p.tail.time_factor = [r](double tau) { return std::exp(-r * tau); };
    p.tail.scaled.resize(N - 1);
    p.tail.fixed.resize(N - 1);
    for (int n = 1; n < N; ++n) {
        const double x = grid.x(n);
        const double s = contract.spot_anchor * std::exp(x);
        if (contract.side == OptionSide::Put) {
            const auto t = detail::left_tail_moments(params.jumps(), -L - x);
            p.tail.scaled[n - 1] = contract.strike * t.mass;
            p.tail.fixed[n - 1] = -s * t.exp_moment;
        } else {
            const auto t = detail::right_tail_moments(params.jumps(), L - x);
            p.tail.scaled[n - 1] = -contract.strike * t.mass;
            p.tail.fixed[n - 1] = s * t.exp_moment;
        }
    }
    p.kink = contract.kink();
    return p;
}

/// Two stored time levels plus their compact derivatives.
struct SchemeState {
    int level = 0;                  // index m of `current`
    std::vector<double> previous;   // U^{m-1}, N + 1 entries
    std::vector<double> current;    // U^m
    std::vector<double> previous_dx;
    std::vector<double> current_dx;
    std::vector<int> iterations;    // inner iterations per computed level
};

struct SolveResult {
    std::vector<double> values;  // U^M on all N + 1 nodes
    GridSpec grid;
    ModelParams params;
    Scheme scheme = Scheme::Compact;
    std::vector<int> iterations;
    double wall_seconds = 0.0;
    bool stability_warning = false;

    double average_iterations() const {
        if (iterations.empty()) return 0.0;
        double s = 0.0;
        for (int k : iterations) s += k;
        return s / static_cast<double>(iterations.size());
    }
};

class PideSolver {
public:
    PideSolver(const ModelParams& params, const GridSpec& grid, PideProblem problem,
               SolveOptions options = {})
        : params_(params),
          grid_(grid),
          problem_(std::move(problem)),
          options_(options),
          coeffs_(SchemeCoefficients::from(params, grid)),
          jump_(grid, params),
          derivative_(grid.size(), grid.dx()) {
        if (!(options_.epsilon > 0.0)) throw ConfigError("inner tolerance must be positive");
        if (options_.max_iter < 1) throw ConfigError("max_iter must be >= 1");
        if (!problem_.initial || !problem_.boundary) throw ConfigError("problem data incomplete");
        const std::size_t m = grid.size() - 2;
        if (!problem_.tail.scaled.empty() &&
            (problem_.tail.scaled.size() != m || problem_.tail.fixed.size() != m))
            throw ConfigError("tail profile does not match the grid");
        factor_matrix();
        work_jump_.resize(m);
        work_tail_.resize(m);
        work_fixed_.resize(m);
        work_rhs_.resize(m);
    }

    const GridSpec& grid() const { return grid_; }
    const SchemeCoefficients& coefficients() const { return coeffs_; }
    const JumpConvolutionOperator& jump_operator() const { return jump_; }
    const SchemeState& state() const { return state_; }
    bool stability_warning() const { return grid_.dtau() > stable_step_limit(params_); }

    /// Level 0 from the (optionally smoothed) initial data with boundary values imposed.
    void initialize() {
        const int N = grid_.intervals;
        std::vector<double> u(grid_.size());
        for (int n = 0; n <= N; ++n) u[n] = problem_.initial(grid_.x(n));
        if (options_.smoothing && problem_.kink) {
            const SmoothingKernel kernel(options_.kernel_resolution);
            apply_smoothing(kernel, problem_.initial, grid_, u, *problem_.kink);
        }
        u.front() = problem_.boundary(grid_.x(0), 0.0);
        u.back() = problem_.boundary(grid_.x(N), 0.0);
        state_ = SchemeState{};
        state_.current = std::move(u);
        state_.current_dx = derivative(state_.current);
    }

    /// Loads two consecutive levels m-1 and m directly.
    void set_levels(int m, std::span<const double> previous, std::span<const double> current) {
        if (m < 1 || previous.size() != grid_.size() || current.size() != grid_.size())
            throw std::invalid_argument("set_levels: bad level or size");
        state_ = SchemeState{};
        state_.level = m;
        state_.previous.assign(previous.begin(), previous.end());
        state_.current.assign(current.begin(), current.end());
        state_.previous_dx = derivative(state_.previous);
        state_.current_dx = derivative(state_.current);
    }

    /// Level 0 -> 1 by one implicit-explicit Euler step.
    void bootstrap() {
        if (state_.level != 0 || state_.current.empty())
            throw std::logic_error("bootstrap requires an initialized level 0");
        const double dt = coeffs_.dtau;
        const auto& u0 = state_.current;
        jump_term(u0, 0.0);
        const std::size_t m = grid_.size() - 2;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = grid_.x(static_cast<int>(i) + 1);
            double f = u0[i + 1] + dt * (work_jump_[i] - coeffs_.reaction * u0[i + 1]);
            if (problem_.source) f += dt * problem_.source(x, 0.0);
            work_fixed_[i] = f;
        }
        advance();
    }

    /// Level m -> m + 1 for m >= 1.
    void step() {
        if (state_.level < 1) throw std::logic_error("step requires two stored levels");
        const double dt = coeffs_.dtau;
        const double a = coeffs_.diffusion;
        const double b = coeffs_.convection;
        const double h = coeffs_.dx;
        const double tau = grid_.tau(state_.level);
        const auto& up = state_.previous;
        const auto& uc = state_.current;
        const auto& dp = state_.previous_dx;
        jump_term(uc, tau);
        const std::size_t m = grid_.size() - 2;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t n = i + 1;
            const double d2 = (up[n + 1] - 2.0 * up[n] + up[n - 1]) / (h * h);
            double f = up[n] + 2.0 * dt * (work_jump_[i] - coeffs_.reaction * uc[n]);
            if (options_.scheme == Scheme::Compact) {
                const double d1x = (dp[n + 1] - dp[n - 1]) / (2.0 * h);
                f += dt * (2.0 * a * d2 - a * d1x + b * dp[n]);
            } else {
                const double d1 = (up[n + 1] - up[n - 1]) / (2.0 * h);
                f += dt * (a * d2 + b * d1);
            }
            if (problem_.source) f += 2.0 * dt * problem_.source(grid_.x(static_cast<int>(n)), tau);
            work_fixed_[i] = f;
        }
        advance();
    }

    SolveResult run() {
        const auto start = std::chrono::steady_clock::now();
        initialize();
        bootstrap();
        while (state_.level < grid_.steps) step();
        const auto stop = std::chrono::steady_clock::now();
        SolveResult r{state_.current, grid_, params_, options_.scheme, state_.iterations,
                      std::chrono::duration<double>(stop - start).count(), stability_warning()};
        return r;
    }

private:
    std::vector<double> derivative(std::span<const double> u) const {
        std::vector<double> out(u.size());
        derivative_.apply(u, out);
        return out;
    }

    void factor_matrix() {
        const std::size_t m = grid_.size() - 2;
        const double dt = coeffs_.dtau;
        const double h = coeffs_.dx;
        const double a = coeffs_.diffusion;
        const double b = coeffs_.convection;
        TridiagonalSystem sys;
        if (options_.scheme == Scheme::Compact) {
            // I - 2 a dt D2
            const double off = -2.0 * a * dt / (h * h);
            sys.lower.assign(m, off);
            sys.upper.assign(m, off);
            sys.diag.assign(m, 1.0 - 2.0 * off);
        } else {
            // I - dt (a D2 + b D1)
            const double diff = a * dt / (h * h);
            const double conv = b * dt / (2.0 * h);
            sys.lower.assign(m, -diff + conv);
            sys.upper.assign(m, -diff - conv);
            sys.diag.assign(m, 1.0 + 2.0 * diff);
        }
        if (!sys.strictly_diagonally_dominant())
            throw NumericalError("implicit matrix is not diagonally dominant");
        lower_coeff_ = sys.lower.front();
        upper_coeff_ = sys.upper.back();
        factor_ = TridiagonalFactor(sys);
    }

    void jump_term(std::span<const double> u, double tau) {
        problem_.tail.evaluate(tau, work_tail_);
        jump_.apply(u, work_tail_, work_jump_);
    }

    // Solves for the next level given work_fixed_ (everything that does not
    // depend on U^{m+1}), then rotates the stored levels.
    void advance() {
        const int N = grid_.intervals;
        const std::size_t m = grid_.size() - 2;
        const double dt = coeffs_.dtau;
        const double a = coeffs_.diffusion;
        const double b = coeffs_.convection;
        const double h = coeffs_.dx;
        const int next_level = state_.level + 1;
        const double tau_next = grid_.tau(next_level);
        const double left = problem_.boundary(grid_.x(0), tau_next);
        const double right = problem_.boundary(grid_.x(N), tau_next);

        std::vector<double> next(grid_.size());
        std::vector<double> guess = state_.current;
        std::vector<double> guess_dx = state_.current_dx;
        next.front() = left;
        next.back() = right;

        int iterations = 0;
        double update = std::numeric_limits<double>::infinity();
        const bool compact = options_.scheme == Scheme::Compact;
        while (true) {
            ++iterations;
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t n = i + 1;
                double r = work_fixed_[i];
                if (compact) r += dt * (b * guess_dx[n] - a * (guess_dx[n + 1] - guess_dx[n - 1]) / (2.0 * h));
                work_rhs_[i] = r;
            }
            work_rhs_.front() -= lower_coeff_ * left;
            work_rhs_.back() -= upper_coeff_ * right;
            factor_.solve(work_rhs_, std::span<double>(next).subspan(1, m));

            update = 0.0;
            for (std::size_t n = 1; n <= m; ++n) {
                if (!std::isfinite(next[n])) throw DivergenceError(next_level, static_cast<int>(n));
                update = std::max(update, std::abs(next[n] - guess[n]));
            }
            if (!compact || update < options_.epsilon) break;
            if (iterations >= options_.max_iter) throw NonConvergenceError(next_level, iterations, update);
            guess = next;
            derivative_.apply(guess, guess_dx);
        }

        state_.previous = std::move(state_.current);
        state_.previous_dx = std::move(state_.current_dx);
        state_.current = std::move(next);
        state_.current_dx = derivative(state_.current);
        state_.level = next_level;
        state_.iterations.push_back(iterations);
    }

    ModelParams params_;
    GridSpec grid_;
    PideProblem problem_;
    SolveOptions options_;
    SchemeCoefficients coeffs_;
    JumpConvolutionOperator jump_;
    CompactFirstDerivative derivative_;
    TridiagonalFactor factor_;
    double lower_coeff_ = 0.0;
    double upper_coeff_ = 0.0;
    SchemeState state_;
    std::vector<double> work_jump_;
    std::vector<double> work_tail_;
    std::vector<double> work_fixed_;
    std::vector<double> work_rhs_;
};

inline SolveResult solve(const ModelParams& params, const Contract& contract, const GridSpec& grid,
                         const SolveOptions& options = {}) {
    contract.validate();
    if (std::abs(grid.maturity - contract.maturity) > 1e-14 * contract.maturity)
        throw ConfigError("grid maturity differs from contract maturity");
    PideSolver solver(params, grid, option_problem(params, contract, grid), options);
    return solver.run();
}

/// Degree-5 Lagrange interpolation of nodal values at log-moneyness x.
inline double interpolate_nodal(std::span<const double> values, const GridSpec& grid, double x) {
    const double h = grid.dx();
    const double lo = -grid.half_width + 3.0 * h;
    const double hi = grid.half_width - 3.0 * h;
    if (!(x > lo - 1e-12 * h && x < hi + 1e-12 * h))
        throw std::out_of_range("interpolation point outside the safe range");
    const double pos = (x + grid.half_width) / h;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-12) return values[static_cast<std::size_t>(nearest)];
    int first = static_cast<int>(std::floor(pos)) - 2;
    first = std::clamp(first, 0, grid.intervals - 5);
    double sum = 0.0;
    for (int j = 0; j < 6; ++j) {
        double w = 1.0;
        const double xj = grid.x(first + j);
        for (int k = 0; k < 6; ++k)
            if (k != j) w *= (x - grid.x(first + k)) / (xj - grid.x(first + k));
        sum += w * values[first + j];
    }
    return sum;
}

inline double price_at(const SolveResult& result, const Contract& contract, double spot) {
    if (!(spot > 0.0)) throw std::out_of_range("spot must be positive");
    return interpolate_nodal(result.values, result.grid, std::log(spot / contract.spot_anchor));
}

}  // namespace jdcompact
