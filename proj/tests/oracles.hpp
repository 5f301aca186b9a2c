#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical routines; only plain parameter structs are shared.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "jdcompact/model.hpp"
#include "jdcompact/operators.hpp"
#include "jdcompact/solver.hpp"

namespace oracle {

using jdcompact::KouJumps;
using jdcompact::MertonJumps;
using jdcompact::ModelParams;

/// Adaptive Gauss-Kronrod on [a, b]; either end may be infinite.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

/// Jump density written out from scratch.
inline double jump_density(const ModelParams& p, double z) {
    if (const auto* m = std::get_if<MertonJumps>(&p.jumps())) {
        const double t = (z - m->mean) / m->stddev;
        return std::exp(-0.5 * t * t) / (std::sqrt(2.0 * std::numbers::pi) * m->stddev);
    }
    const auto& k = std::get<KouJumps>(p.jumps());
    return z >= 0.0 ? k.up_probability * k.up_rate * std::exp(-k.up_rate * z)
                    : (1.0 - k.up_probability) * k.down_rate * std::exp(k.down_rate * z);
}

/// int f(z) g(z) dz over [a, b], split at the Kou jump.
template <class F>
double against_density(const ModelParams& p, F f, double a, double b) {
    // The density underflows before f overflows; drop the 0 * inf products far out.
    auto h = [&](double z) {
        const double g = jump_density(p, z);
        return g == 0.0 ? 0.0 : f(z) * g;
    };
    if (p.is_kou() && a < 0.0 && b > 0.0) return integrate(h, a, 0.0) + integrate(h, 0.0, b);
    return integrate(h, a, b);
}

/// E[e^{iuZ}].
inline std::complex<double> jump_cf(const ModelParams& p, std::complex<double> u) {
    const std::complex<double> i(0.0, 1.0);
    if (const auto* m = std::get_if<MertonJumps>(&p.jumps()))
        return std::exp(i * u * m->mean - 0.5 * m->stddev * m->stddev * u * u);
    const auto& k = std::get<KouJumps>(p.jumps());
    return k.up_probability * k.up_rate / (k.up_rate - i * u) +
           (1.0 - k.up_probability) * k.down_rate / (k.down_rate + i * u);
}

/// Black-Scholes by integrating the payoff against the lognormal density.
inline double black_scholes_by_quadrature(bool call, double S, double K, double r, double vol, double T) {
    const double m = std::log(S) + (r - 0.5 * vol * vol) * T;
    const double s = vol * std::sqrt(T);
    auto pdf = [&](double y) { return std::exp(-0.5 * (y - m) * (y - m) / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); };
    const double k = std::log(K);
    const double v = call ? integrate([&](double y) { return (std::exp(y) - K) * pdf(y); }, k, m + 40.0 * s)
                          : integrate([&](double y) { return (K - std::exp(y)) * pdf(y); }, m - 40.0 * s, k);
    return std::exp(-r * T) * v;
}

/// European price from the characteristic function of log S_T (Gil-Pelaez).
inline double price_by_inversion(const ModelParams& p, bool call, double S, double K, double T) {
    const std::complex<double> i(0.0, 1.0);
    const double r = p.rate();
    const double vol = p.volatility();
    const double lam = p.intensity();
    const double zeta = std::real(jump_cf(p, -i)) - 1.0;
    auto cf = [&](std::complex<double> u) {
        return std::exp(i * u * (std::log(S) + (r - 0.5 * vol * vol - lam * zeta) * T) - 0.5 * vol * vol * u * u * T +
                        lam * T * (jump_cf(p, u) - 1.0));
    };
    const double lk = std::log(K);
    const std::complex<double> fwd = cf(-i);
    auto pi1 = [&](double u) {
        if (u == 0.0) return 0.0;
        return std::real(std::exp(-i * u * lk) * cf(u - i) / (i * u * fwd));
    };
    auto pi2 = [&](double u) {
        if (u == 0.0) return 0.0;
        return std::real(std::exp(-i * u * lk) * cf(u) / (i * u));
    };
    const double inf = std::numeric_limits<double>::infinity();
    const double P1 = 0.5 + integrate(pi1, 0.0, inf, 1e-12) / std::numbers::pi;
    const double P2 = 0.5 + integrate(pi2, 0.0, inf, 1e-12) / std::numbers::pi;
    const double c = S * P1 - K * std::exp(-r * T) * P2;
    return call ? c : c - S + K * std::exp(-r * T);
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
inline std::vector<double> dense_solve(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A[i * n + k] / A[k * n + k];
            for (std::size_t j = k; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A[k * n + j] * x[j];
        x[k] = s / A[k * n + k];
    }
    return x;
}

inline std::vector<double> dense_matvec(const std::vector<double>& A, const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i] += A[i * n + j] * v[j];
    return out;
}

/// The smoothing kernel by numerical inverse cosine transform of its symbol.
inline double phi4_by_inverse_transform(double s) {
    static boost::math::quadrature::ooura_fourier_cos<double> ooura(1e-12);
    auto hat = [](double w) {
        if (w == 0.0) return 1.0;
        const double h = std::sin(0.5 * w) / (0.5 * w);
        const double q = std::sin(0.5 * w);
        return h * h * h * h * (1.0 + 2.0 / 3.0 * q * q);
    };
    if (s == 0.0) return integrate(hat, 0.0, std::numeric_limits<double>::infinity(), 1e-12) / std::numbers::pi;
    return ooura.integrate(hat, std::abs(s)).first / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Manufactured solution u*(x, tau) = exp(-tau) sin x for the full PIDE
//   u_tau = a u_xx + b u_x - (r + lambda) u + lambda int u(y) g(y - x) dy + f.

struct Manufactured {
    ModelParams params;
    double half_width;

    double exact(double x, double tau) const { return std::exp(-tau) * std::sin(x); }

    double source(double x, double tau) const {
        const double a = params.diffusion();
        const double b = params.convection();
        const double e = std::exp(-tau);
        const std::complex<double> phi = jump_cf(params, 1.0);
        const double conv = std::imag(std::polar(1.0, x) * phi);  // int sin(x + z) g(z) dz
        return e * (-std::sin(x) + a * std::sin(x) - b * std::cos(x) + params.reaction() * std::sin(x) -
                    params.intensity() * conv);
    }

    /// int_{|y| > L} sin(y) g(y - x) dy by adaptive quadrature.
    double exterior(double x) const {
        const double L = half_width;
        const double inf = std::numeric_limits<double>::infinity();
        auto f = [&](double z) { return std::sin(x + z); };
        return against_density(params, f, -inf, -L - x) + against_density(params, f, L - x, inf);
    }

    jdcompact::PideProblem problem(const jdcompact::GridSpec& grid) const {
        jdcompact::PideProblem p;
        p.initial = [](double x) { return std::sin(x); };
        p.boundary = [this](double x, double tau) { return exact(x, tau); };
        p.source = [this](double x, double tau) { return source(x, tau); };
        p.tail.time_factor = [](double tau) { return std::exp(-tau); };
        for (int n = 1; n < grid.intervals; ++n) {
            p.tail.scaled.push_back(exterior(grid.x(n)));
            p.tail.fixed.push_back(0.0);
        }
        return p;
    }

    /// l2 error at maturity on the grid.
    double error(const jdcompact::GridSpec& grid, jdcompact::SolveOptions options = {}) const {
        jdcompact::PideSolver solver(params, grid, problem(grid), options);
        const auto r = solver.run();
        double s = 0.0;
        for (int n = 1; n < grid.intervals; ++n) {
            const double d = r.values[n] - exact(grid.x(n), grid.maturity);
            s += d * d;
        }
        return std::sqrt(grid.dx() * s);
    }
};

}  // namespace oracle
