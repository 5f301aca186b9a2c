#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jdcompact/errors.hpp"

namespace jdcompact {

/// Uniform space-time grid on [-L, L] x [0, T].
struct GridSpec {
    double half_width = 2.0;  // L
    int intervals = 256;      // N, even
    int steps = 2;            // M
    double maturity = 0.25;   // T

    GridSpec() = default;
    GridSpec(double L, int N, int M, double T) : half_width(L), intervals(N), steps(M), maturity(T) {
        validate();
    }

    /// M = round(T / (rho dx^2)), at least 2.
    static GridSpec from_mesh_ratio(double L, int N, double T, double rho = 0.4) {
        if (!(rho > 0.0)) throw ConfigError("mesh ratio must be positive");
        if (!(L > 0.0) || N <= 0) throw ConfigError("invalid grid extent");
        const double dx = 2.0 * L / N;
        const double steps = std::round(T / (rho * dx * dx));
        if (!(steps < 2.0e9)) throw ConfigError("too many time steps");
        return {L, N, std::max(2, static_cast<int>(steps)), T};
    }

    void validate() const {
        if (!(half_width > 0.0)) throw ConfigError("half-width L must be positive");
        if (intervals < 8 || intervals % 2 != 0)
            throw ConfigError("number of space intervals N must be even and >= 8");
        if (steps < 2) throw ConfigError("number of time steps M must be >= 2");
        if (!(maturity > 0.0)) throw ConfigError("maturity must be positive");
    }

    double dx() const { return 2.0 * half_width / intervals; }
    double dtau() const { return maturity / steps; }
    double mesh_ratio() const { return dtau() / (dx() * dx()); }
    double x(int n) const { return -half_width + n * dx(); }
    double tau(int m) const { return m * dtau(); }
    std::size_t size() const { return static_cast<std::size_t>(intervals) + 1; }

    std::vector<double> nodes() const {
        std::vector<double> xs(size());
        for (int n = 0; n <= intervals; ++n) xs[n] = x(n);
        return xs;
    }
};

/// Tridiagonal matrix with right-hand side. lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> rhs;

    std::size_t size() const { return diag.size(); }

    bool strictly_diagonally_dominant() const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            double off = 0.0;
            if (i > 0) off += std::abs(lower[i]);
            if (i + 1 < n) off += std::abs(upper[i]);
            if (!(std::abs(diag[i]) > off)) return false;
        }
        return true;
    }

    std::vector<double> apply(std::span<const double> v) const {
        const std::size_t n = size();
        if (v.size() != n) throw std::invalid_argument("tridiagonal apply: size mismatch");
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * v[i];
            if (i > 0) s += lower[i] * v[i - 1];
            if (i + 1 < n) s += upper[i] * v[i + 1];
            out[i] = s;
        }
        return out;
    }
};

/// Thomas-algorithm factorization, reusable across right-hand sides.
class TridiagonalFactor {
public:
    TridiagonalFactor() = default;

    TridiagonalFactor(std::span<const double> lower, std::span<const double> diag,
                      std::span<const double> upper)
        : lower_(lower.begin(), lower.end()), inv_pivot_(diag.size()), upper_mod_(diag.size()) {
        const std::size_t n = diag.size();
        if (n == 0 || lower.size() != n || upper.size() != n)
            throw std::invalid_argument("tridiagonal factor: inconsistent sizes");
        double prev_upper = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pivot = diag[i] - (i > 0 ? lower[i] * prev_upper : 0.0);
            if (pivot == 0.0 || !std::isfinite(pivot))
                throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(i));
            inv_pivot_[i] = 1.0 / pivot;
            upper_mod_[i] = (i + 1 < n ? upper[i] : 0.0) * inv_pivot_[i];
            prev_upper = upper_mod_[i];
        }
    }

    explicit TridiagonalFactor(const TridiagonalSystem& s)
        : TridiagonalFactor(s.lower, s.diag, s.upper) {}

    std::size_t size() const { return inv_pivot_.size(); }

    /// out may alias rhs.
    void solve(std::span<const double> rhs, std::span<double> out) const {
        const std::size_t n = size();
        if (rhs.size() != n || out.size() != n)
            throw std::invalid_argument("tridiagonal solve: size mismatch");
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            prev = (rhs[i] - (i > 0 ? lower_[i] * prev : 0.0)) * inv_pivot_[i];
            out[i] = prev;
        }
        for (std::size_t i = n - 1; i-- > 0;) out[i] -= upper_mod_[i] * out[i + 1];
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> out(rhs.size());
        solve(rhs, out);
        return out;
    }

private:
    std::vector<double> lower_;
    std::vector<double> inv_pivot_;
    std::vector<double> upper_mod_;
};

inline std::vector<double> thomas_solve(const TridiagonalSystem& system) {
    return TridiagonalFactor(system).solve(system.rhs);
}

// Second-order central differences. Endpoints use one-sided second-order formulas.

inline std::vector<double> central_first(std::span<const double> u, double dx) {
    const std::size_t n = u.size();
    if (n < 3) throw std::invalid_argument("central_first needs at least 3 values");
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
    return out;
}

inline std::vector<double> central_second(std::span<const double> u, double dx) {
    const std::size_t n = u.size();
    if (n < 3) throw std::invalid_argument("central_second needs at least 3 values");
    const double h2 = dx * dx;
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    if (n >= 4) {
        out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
        out[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
    } else {
        out[0] = out[2] = out[1];
    }
    return out;
}

/// Fourth-order one-sided five-point first derivative at the first (left) or last node.
inline std::pair<double, double> one_sided_boundary_derivatives(std::span<const double> u, double dx) {
    const std::size_t n = u.size();
    const double left = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * dx);
    const double right = (25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4] +
                          3.0 * u[n - 5]) / (12.0 * dx);
    return {left, right};
}

/// Fourth-order compact first derivative
///   u'_{i-1}/4 + u'_i + u'_{i+1}/4 = 3/(4 dx) (u_{i+1} - u_{i-1})
/// on the interior, closed by explicit five-point formulas at both ends.
/// The interior matrix is factored once; apply() is reentrant.
class CompactFirstDerivative {
public:
    CompactFirstDerivative() = default;

    CompactFirstDerivative(std::size_t size, double dx) : size_(size), dx_(dx) {
        if (size < 5) throw std::invalid_argument("compact derivative needs at least 5 values");
        const std::size_t m = size - 2;
        std::vector<double> lo(m, 0.25), di(m, 1.0), up(m, 0.25);
        TridiagonalSystem probe{lo, di, up, {}};
        if (!probe.strictly_diagonally_dominant())
            throw std::logic_error("compact derivative matrix is not diagonally dominant");
        factor_ = TridiagonalFactor(lo, di, up);
    }

    std::size_t size() const { return size_; }
    double dx() const { return dx_; }

    /// Boundary derivatives given explicitly.
    void apply(std::span<const double> u, std::pair<double, double> boundary,
               std::span<double> out) const {
        if (u.size() != size_ || out.size() != size_)
            throw std::invalid_argument("compact derivative: size mismatch");
        const std::size_t n = size_;
        const double c = 0.75 / dx_;
        out[0] = boundary.first;
        out[n - 1] = boundary.second;
        for (std::size_t i = 1; i + 1 < n; ++i) out[i] = c * (u[i + 1] - u[i - 1]);
        out[1] -= 0.25 * boundary.first;
        out[n - 2] -= 0.25 * boundary.second;
        factor_.solve(out.subspan(1, n - 2), out.subspan(1, n - 2));
    }

    void apply(std::span<const double> u, std::span<double> out) const {
        apply(u, one_sided_boundary_derivatives(u, dx_), out);
    }

    std::vector<double> operator()(std::span<const double> u) const {
        std::vector<double> out(u.size());
        apply(u, out);
        return out;
    }

private:
    std::size_t size_ = 0;
    double dx_ = 0.0;
    TridiagonalFactor factor_;
};

inline std::vector<double> compact_first_derivative(std::span<const double> u, double dx) {
    return CompactFirstDerivative(u.size(), dx)(u);
}

inline std::vector<double> compact_first_derivative(std::span<const double> u, double dx,
                                                    std::pair<double, double> boundary) {
    std::vector<double> out(u.size());
    CompactFirstDerivative(u.size(), dx).apply(u, boundary, out);
    return out;
}

/// u_xx = 2 D2 u - D1 u_x on the interior. Endpoints fall back to the one-sided
/// second-order second difference of u.
inline std::vector<double> second_derivative_elim(std::span<const double> u,
                                                  std::span<const double> ux, double dx) {
    if (u.size() != ux.size()) throw std::invalid_argument("second_derivative_elim: size mismatch");
    if (u.size() < 3) throw std::invalid_argument("second_derivative_elim needs at least 3 values");
    const std::size_t n = u.size();
    std::vector<double> out = central_second(u, dx);
    const double h2 = dx * dx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = 2.0 * (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 - (ux[i + 1] - ux[i - 1]) / (2.0 * dx);
    }
    return out;
}

}  // namespace jdcompact
