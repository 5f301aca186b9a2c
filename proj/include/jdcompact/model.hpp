#pragma once

// Jump-diffusion model definitions in log-moneyness coordinates.
//
// The option value u(x, tau) with x = ln(S/S0) and tau = T - t solves
//
//   u_tau = (sigma^2/2) u_xx + (r - sigma^2/2 - lambda*zeta) u_x - (r + lambda) u
//           + lambda * int u(y, tau) g(y - x) dy
//
// where g is the jump-size density and zeta = E[e^J - 1].
//
// Kou convention: `up_probability` is the weight of the positive branch,
//
//   g(x) = p * l+ * exp(-l+ x) 1{x >= 0} + (1 - p) * l- * exp(l- x) 1{x < 0}.
//
// Tail corrections. Outside (-L, L) the solution is replaced by its asymptote,
// so the truncated part of the jump integral has a closed form. With z = y - x:
//
//   put (left tail, c = -L - x):
//     Ke^{-r tau} P[z < c] - S0 e^x E[e^z; z < c]
//   call (right tail, c = L - x):
//     S0 e^x E[e^z; z > c] - Ke^{-r tau} P[z > c]
//
// Merton: P and E are normal CDF values (E picks up a shift of sigma_J^2 in the
// argument and a factor exp(mu_J + sigma_J^2/2)). Kou, for c <= 0 on the left:
//   P = (1-p) exp(l- c),  E = (1-p) l-/(l- + 1) exp((l- + 1) c)
// and for c >= 0 on the right:
//   P = p exp(-l+ c),     E = p l+/(l+ - 1) exp(-(l+ - 1) c).
// The opposite-sign cases add the complete mass of the near branch.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "jdcompact/errors.hpp"

namespace jdcompact {

struct MertonJumps {
    double mean = -0.90;   // mu_J
    double stddev = 0.45;  // sigma_J
};

struct KouJumps {
    double up_rate = 3.0465;          // lambda_plus, must exceed 1
    double down_rate = 3.0775;        // lambda_minus
    double up_probability = 0.3445;   // p
};

using JumpDensity = std::variant<MertonJumps, KouJumps>;

inline double compute_zeta(const JumpDensity& jumps);

/// Market and jump-process parameters. Immutable; zeta is cached on construction.
class ModelParams {
public:
    ModelParams(double volatility, double rate, double intensity, JumpDensity jumps)
        : volatility_(volatility), rate_(rate), intensity_(intensity), jumps_(jumps) {
        if (!(volatility > 0.0) || !std::isfinite(volatility))
            throw ConfigError("volatility must be positive");
        if (!std::isfinite(rate)) throw ConfigError("rate must be finite");
        if (!(intensity >= 0.0) || !std::isfinite(intensity))
            throw ConfigError("jump intensity must be non-negative");
        if (const auto* m = std::get_if<MertonJumps>(&jumps_)) {
            if (!(m->stddev > 0.0) || !std::isfinite(m->mean))
                throw ConfigError("Merton jump stddev must be positive");
        }
        zeta_ = compute_zeta(jumps_);
    }

    /// Parameters of the Merton example (lambda = 0.1, sigma = 0.15, r = 0.05).
    static ModelParams merton_default() { return {0.15, 0.05, 0.10, MertonJumps{}}; }
    static ModelParams kou_default() { return {0.15, 0.05, 0.10, KouJumps{}}; }

    double volatility() const { return volatility_; }
    double rate() const { return rate_; }
    double intensity() const { return intensity_; }
    double zeta() const { return zeta_; }
    const JumpDensity& jumps() const { return jumps_; }
    bool is_merton() const { return std::holds_alternative<MertonJumps>(jumps_); }
    bool is_kou() const { return std::holds_alternative<KouJumps>(jumps_); }

    ModelParams with_intensity(double intensity) const {
        return {volatility_, rate_, intensity, jumps_};
    }

    // sigma^2/2, r - sigma^2/2 - lambda*zeta, r + lambda
    double diffusion() const { return 0.5 * volatility_ * volatility_; }
    double convection() const { return rate_ - diffusion() - intensity_ * zeta_; }
    double reaction() const { return rate_ + intensity_; }

private:
    double volatility_;
    double rate_;
    double intensity_;
    JumpDensity jumps_;
    double zeta_ = 0.0;
};

enum class OptionSide { Call, Put };

inline std::string to_string(OptionSide side) { return side == OptionSide::Call ? "call" : "put"; }

struct Contract {
    OptionSide side = OptionSide::Put;
    double strike = 100.0;
    double spot_anchor = 100.0;  // S0, the spot mapped to x = 0
    double maturity = 0.25;

    Contract() = default;
    Contract(OptionSide s, double k, double s0, double t)
        : side(s), strike(k), spot_anchor(s0), maturity(t) {
        validate();
    }

    void validate() const {
        if (!(strike > 0.0)) throw ConfigError("strike must be positive");
        if (!(spot_anchor > 0.0)) throw ConfigError("spot anchor must be positive");
        if (!(maturity > 0.0)) throw ConfigError("maturity must be positive");
    }

    /// Log-moneyness of the payoff kink.
    double kink() const { return std::log(strike / spot_anchor); }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double density(const ModelParams& params, double x) {
    if (const auto* m = std::get_if<MertonJumps>(&params.jumps())) {
        const double z = (x - m->mean) / m->stddev;
        return std::exp(-0.5 * z * z) / (m->stddev * std::sqrt(2.0 * std::numbers::pi));
    }
    const auto& k = std::get<KouJumps>(params.jumps());
    if (x >= 0.0) return k.up_probability * k.up_rate * std::exp(-k.up_rate * x);
    return (1.0 - k.up_probability) * k.down_rate * std::exp(k.down_rate * x);
}

inline double compute_zeta(const JumpDensity& jumps) {
    if (const auto* m = std::get_if<MertonJumps>(&jumps)) {
        return std::expm1(m->mean + 0.5 * m->stddev * m->stddev);
    }
    const auto& k = std::get<KouJumps>(jumps);
    if (!(k.up_rate > 1.0)) throw ConfigError("Kou up_rate must exceed 1 (zeta diverges)");
    if (!(k.down_rate > 0.0)) throw ConfigError("Kou down_rate must be positive");
    if (!(k.up_probability >= 0.0 && k.up_probability <= 1.0))
        throw ConfigError("Kou up_probability must lie in [0, 1]");
    const double p = k.up_probability;
    return p * k.up_rate / (k.up_rate - 1.0) + (1.0 - p) * k.down_rate / (k.down_rate + 1.0) - 1.0;
}

inline double compute_zeta(const ModelParams& params) { return compute_zeta(params.jumps()); }

inline double payoff(const Contract& c, double x) {
    const double s = c.spot_anchor * std::exp(x);
    return c.side == OptionSide::Call ? std::max(s - c.strike, 0.0) : std::max(c.strike - s, 0.0);
}

/// Far-field asymptote; the left branch applies for x < 0, the right branch otherwise.
inline double boundary_value(const Contract& c, const ModelParams& params, double x, double tau) {
    const double discounted_strike = c.strike * std::exp(-params.rate() * tau);
    const double s = c.spot_anchor * std::exp(x);
    if (c.side == OptionSide::Put) return x < 0.0 ? discounted_strike - s : 0.0;
    return x < 0.0 ? 0.0 : s - discounted_strike;
}

namespace detail {

// P[z < c] and E[e^z; z < c] for the jump size z.
struct TailMoments {
    double mass;
    double exp_moment;
};

inline TailMoments left_tail_moments(const JumpDensity& jumps, double c) {
    if (const auto* m = std::get_if<MertonJumps>(&jumps)) {
        const double v = m->stddev * m->stddev;
        return {normal_cdf((c - m->mean) / m->stddev),
                std::exp(m->mean + 0.5 * v) * normal_cdf((c - m->mean - v) / m->stddev)};
    }
    const auto& k = std::get<KouJumps>(jumps);
    const double q = 1.0 - k.up_probability;
    const double down_e = q * k.down_rate / (k.down_rate + 1.0);
    if (c <= 0.0) return {q * std::exp(k.down_rate * c), down_e * std::exp((k.down_rate + 1.0) * c)};
    const double p = k.up_probability;
    return {q + p * -std::expm1(-k.up_rate * c),
            down_e + p * k.up_rate / (k.up_rate - 1.0) * -std::expm1(-(k.up_rate - 1.0) * c)};
}

// P[z > c] and E[e^z; z > c].
inline TailMoments right_tail_moments(const JumpDensity& jumps, double c) {
    if (const auto* m = std::get_if<MertonJumps>(&jumps)) {
        const double v = m->stddev * m->stddev;
        return {normal_cdf((m->mean - c) / m->stddev),
                std::exp(m->mean + 0.5 * v) * normal_cdf((m->mean + v - c) / m->stddev)};
    }
    const auto& k = std::get<KouJumps>(jumps);
    const double p = k.up_probability;
    const double up_e = p * k.up_rate / (k.up_rate - 1.0);
    if (c >= 0.0) return {p * std::exp(-k.up_rate * c), up_e * std::exp(-(k.up_rate - 1.0) * c)};
    const double q = 1.0 - p;
    return {p + q * -std::expm1(k.down_rate * c),
            up_e + q * k.down_rate / (k.down_rate + 1.0) * -std::expm1((k.down_rate + 1.0) * c)};
}

}  // namespace detail

/// Jump integral over R \ (-L, L) with the solution replaced by its asymptote.
inline double tail_correction(const Contract& c, const ModelParams& params, double x, double tau,
                              double half_width) {
    if (!(half_width > 0.0)) throw ConfigError("domain half-width must be positive");
    const double discounted_strike = c.strike * std::exp(-params.rate() * tau);
    const double s = c.spot_anchor * std::exp(x);
    if (c.side == OptionSide::Put) {
        const auto t = detail::left_tail_moments(params.jumps(), -half_width - x);
        return discounted_strike * t.mass - s * t.exp_moment;
    }
    const auto t = detail::right_tail_moments(params.jumps(), half_width - x);
    return s * t.exp_moment - discounted_strike * t.mass;
}

inline double black_scholes_price(OptionSide side, double spot, double strike, double rate,
                                  double volatility, double maturity) {
    const double sd = volatility * std::sqrt(maturity);
    const double df = std::exp(-rate * maturity);
    const double d1 = (std::log(spot / strike) + rate * maturity) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    if (side == OptionSide::Call) return spot * normal_cdf(d1) - strike * df * normal_cdf(d2);
    return strike * df * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

/// Merton's Poisson mixture of Black-Scholes prices.
inline double merton_series_price(const Contract& c, const ModelParams& params, double spot,
                                  int n_terms = 200) {
    const auto* m = std::get_if<MertonJumps>(&params.jumps());
    if (m == nullptr) throw ConfigError("series price requires a Merton jump density");
    if (n_terms < 1) throw ConfigError("series needs at least one term");
    const double T = c.maturity;
    const double zeta = params.zeta();
    const double lambda_t = params.intensity() * (1.0 + zeta) * T;
    const double log_jump = std::log1p(zeta);
    double sum = 0.0;
    double log_weight = -lambda_t;  // log Poisson weight of n = 0
    for (int n = 0; n < n_terms; ++n) {
        if (n > 0) log_weight += std::log(lambda_t) - std::log(static_cast<double>(n));
        const double vol = std::sqrt(params.volatility() * params.volatility() +
                                     n * m->stddev * m->stddev / T);
        const double rate = params.rate() - params.intensity() * zeta + n * log_jump / T;
        const double term = lambda_t > 0.0 || n == 0
                                ? std::exp(log_weight) *
                                      black_scholes_price(c.side, spot, c.strike, rate, vol, T)
                                : 0.0;
        sum += term;
        if (n > lambda_t && std::abs(term) < 1e-14 * std::abs(sum)) break;
        if (lambda_t == 0.0) break;
    }
    return sum;
}

}  // namespace jdcompact
