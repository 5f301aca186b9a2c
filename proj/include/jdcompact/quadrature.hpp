#pragma once

// Jump integral discretization.
//
// On (-L, L) the integral  int u(y) g(y - x_n) dy  is evaluated with composite
// Simpson's rule. Moving the Simpson pattern [4, 2, ..., 2, 4] from the matrix
// onto the interior vector leaves the Toeplitz matrix
//
//   Bt[n][i] = dx/3 * g(x_i - x_n),   1 <= n, i <= N-1,
//
// whose product is formed in O(N log N) through a circulant embedding. The
// endpoint terms (weight 1) and the closed-form exterior tail are added
// separately.
//
// A kernel with a jump at zero (Kou) puts a discontinuity at y = x_n. At even n
// it falls on a Simpson panel boundary and the averaged value g(0) = (g(0-) +
// g(0+))/2 is exact to fourth order. At odd n the straddling panel is replaced
// by one-sided four-point rules on each half, applied as a seven-point stencil.

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "jdcompact/detail/fftw.hpp"
#include "jdcompact/errors.hpp"
#include "jdcompact/model.hpp"
#include "jdcompact/operators.hpp"

namespace jdcompact {

/// Integer Simpson pattern [1, 4, 2, ..., 2, 4, 1] of length N + 1.
inline std::vector<int> simpson_weights(int N) {
    if (N < 2 || N % 2 != 0) throw ConfigError("Simpson's rule needs an even number of intervals");
    std::vector<int> w(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) w[k] = (k == 0 || k == N) ? 1 : (k % 2 == 1 ? 4 : 2);
    return w;
}

inline std::vector<double> dense_toeplitz_matvec(std::span<const double> first_col,
                                                 std::span<const double> first_row,
                                                 std::span<const double> v) {
    const std::size_t n = v.size();
    if (first_col.size() != n || first_row.size() != n)
        throw std::invalid_argument("toeplitz matvec: dimension mismatch");
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (j >= k ? first_col[j - k] : first_row[k - j]) * v[k];
        out[j] = s;
    }
    return out;
}

/// Toeplitz matrix-vector product through a zero-padded circulant embedding.
/// The embedding spectrum is computed once; apply() is reentrant.
class ToeplitzMatvec {
public:
    ToeplitzMatvec(std::span<const double> first_col, std::span<const double> first_row)
        : n_(first_col.size()) {
        if (n_ == 0 || first_row.size() != n_)
            throw std::invalid_argument("toeplitz matvec: dimension mismatch");
        std::size_t p = 1;
        while (p < 2 * n_ - 1) p <<= 1;
        plans_ = std::make_shared<detail::RealFftPlans>(p);

        auto col = detail::alloc_real(p);
        auto spec = detail::alloc_complex(plans_->spectrum_size());
        std::fill(col.get(), col.get() + p, 0.0);
        for (std::size_t k = 0; k < n_; ++k) col[k] = first_col[k];
        for (std::size_t k = 1; k < n_; ++k) col[p - k] = first_row[k];
        plans_->forward(col.get(), spec.get());

        spectrum_.resize(plans_->spectrum_size());
        const double scale = 1.0 / static_cast<double>(p);
        for (std::size_t k = 0; k < spectrum_.size(); ++k)
            spectrum_[k] = std::complex<double>(spec[k][0], spec[k][1]) * scale;
    }

    std::size_t size() const { return n_; }
    std::size_t embedding_size() const { return plans_->size(); }

    void apply(std::span<const double> v, std::span<double> out) const {
        if (v.size() != n_ || out.size() != n_)
            throw std::invalid_argument("toeplitz matvec: dimension mismatch");
        const std::size_t p = plans_->size();
        auto buf = detail::alloc_real(p);
        auto spec = detail::alloc_complex(plans_->spectrum_size());
        std::copy(v.begin(), v.end(), buf.get());
        std::fill(buf.get() + n_, buf.get() + p, 0.0);
        plans_->forward(buf.get(), spec.get());
        for (std::size_t k = 0; k < spectrum_.size(); ++k) {
            const std::complex<double> z =
                std::complex<double>(spec[k][0], spec[k][1]) * spectrum_[k];
            spec[k][0] = z.real();
            spec[k][1] = z.imag();
        }
        plans_->backward(spec.get(), buf.get());
        std::copy(buf.get(), buf.get() + n_, out.begin());
    }

    std::vector<double> operator()(std::span<const double> v) const {
        std::vector<double> out(v.size());
        apply(v, out);
        return out;
    }

private:
    std::size_t n_;
    std::shared_ptr<const detail::RealFftPlans> plans_;
    std::vector<std::complex<double>> spectrum_;
};

inline std::vector<double> fft_toeplitz_matvec(std::span<const double> first_col,
                                               std::span<const double> first_row,
                                               std::span<const double> v) {
    if (v.size() != first_col.size())
        throw std::invalid_argument("toeplitz matvec: dimension mismatch");
    return ToeplitzMatvec(first_col, first_row)(v);
}

/// lambda * (Bt * (w u) + P + tail) on the interior nodes of a grid.
class JumpConvolutionOperator {
public:
    JumpConvolutionOperator(const GridSpec& grid, const ModelParams& params)
        : grid_(grid), intensity_(params.intensity()), jump_at_zero_(params.is_kou()) {
        grid.validate();
        const int N = grid.intervals;
        const double h = grid.dx();
        const double scale = h / 3.0;
        const std::size_t m = static_cast<std::size_t>(N) - 1;

        auto g = [&](double x) { return density(params, x); };
        const double g_zero = jump_at_zero_ ? 0.5 * (g(0.0) + g(-kTiny)) : g(0.0);

        // Bt[n][i] depends on i - n: column entries are g(-d h), row entries g(d h).
        first_col_.resize(m);
        first_row_.resize(m);
        for (std::size_t d = 0; d < m; ++d) {
            first_col_[d] = d == 0 ? scale * g_zero : scale * g(-static_cast<double>(d) * h);
            first_row_[d] = d == 0 ? scale * g_zero : scale * g(static_cast<double>(d) * h);
        }
        toeplitz_ = std::make_shared<const ToeplitzMatvec>(first_col_, first_row_);

        left_end_.resize(m);
        right_end_.resize(m);
        for (int n = 1; n < N; ++n) {
            left_end_[n - 1] = scale * g(grid.x(0) - grid.x(n));
            right_end_[n - 1] = scale * g(grid.x(N) - grid.x(n));
        }

        if (jump_at_zero_) build_jump_stencils(g, std::get<KouJumps>(params.jumps()));

        symbol_samples_.resize(static_cast<std::size_t>(N) + 1);
        for (int k = 0; k <= N; ++k) symbol_samples_[k] = g(grid.x(k));

        if (N <= 256) self_check();
    }

    const GridSpec& grid() const { return grid_; }
    double intensity() const { return intensity_; }
    std::span<const double> first_column() const { return first_col_; }
    std::span<const double> first_row() const { return first_row_; }
    const ToeplitzMatvec& toeplitz() const { return *toeplitz_; }

    /// u has N + 1 entries including both boundary nodes; tail and out have N - 1.
    void apply(std::span<const double> u, std::span<const double> tail, std::span<double> out) const {
        const std::size_t m = first_col_.size();
        if (u.size() != m + 2 || tail.size() != m || out.size() != m)
            throw std::invalid_argument("jump integral: dimension mismatch");
        if (intensity_ == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        std::vector<double> weighted(m);
        for (std::size_t i = 0; i < m; ++i) weighted[i] = (i % 2 == 0 ? 4.0 : 2.0) * u[i + 1];
        toeplitz_->apply(weighted, out);
        const double u0 = u.front();
        const double uN = u.back();
        for (std::size_t i = 0; i < m; ++i) out[i] += u0 * left_end_[i] + uN * right_end_[i];
        if (jump_at_zero_) add_jump_correction(u, out);
        for (std::size_t i = 0; i < m; ++i) out[i] = intensity_ * (out[i] + tail[i]);
    }

    std::vector<double> apply(std::span<const double> u, std::span<const double> tail) const {
        std::vector<double> out(first_col_.size());
        apply(u, tail, out);
        return out;
    }

    /// dx * sum_k (w_k/3) e^{i theta k} g(x_k) with the Simpson weights w_k.
    std::complex<double> symbol(double theta) const {
        const int N = grid_.intervals;
        std::complex<double> s = 0.0;
        for (int k = 0; k <= N; ++k) {
            const double w = (k == 0 || k == N) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            s += w * symbol_samples_[k] * std::polar(1.0, theta * k);
        }
        return s * (grid_.dx() / 3.0);
    }

    /// Dense (N-1) x (N-1) Toeplitz matrix, row-major. For tests and small N.
    std::vector<double> dense_matrix() const {
        const std::size_t m = first_col_.size();
        std::vector<double> a(m * m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) a[r * m + c] = r >= c ? first_col_[r - c] : first_row_[c - r];
        return a;
    }

private:
    static constexpr double kTiny = std::numeric_limits<double>::min();

    // Stencil over u_{n-3..n+3} replacing the Simpson panel that straddles x_n (odd n).
    struct Stencil {
        std::array<double, 7> c{};
    };

    template <class G>
    void build_jump_stencils(G g, const KouJumps& k) {
        const double h = grid_.dx();
        const double g_plus = g(0.0);
        const double g_minus = g(-kTiny);
        const double g_zero = 0.5 * (g_plus + g_minus);

        // Simpson panel to remove: h/3 (F_{n-1} + 4 u_n g0 + F_{n+1}).
        Stencil base;
        base.c[3] = -4.0 * h / 3.0 * g_zero;
        base.c[2] = -h / 3.0 * g(-h);
        base.c[4] = -h / 3.0 * g(h);

        // Four-point rules (9, 19, -5, 1)/24 on each half-interval.
        auto add_right_full = [&](Stencil& s) {
            s.c[3] += 9.0 * h / 24.0 * g_plus;
            s.c[4] += 19.0 * h / 24.0 * g(h);
            s.c[5] += -5.0 * h / 24.0 * g(2 * h);
            s.c[6] += 1.0 * h / 24.0 * g(3 * h);
        };
        auto add_left_full = [&](Stencil& s) {
            s.c[3] += 9.0 * h / 24.0 * g_minus;
            s.c[2] += 19.0 * h / 24.0 * g(-h);
            s.c[1] += -5.0 * h / 24.0 * g(-2 * h);
            s.c[0] += 1.0 * h / 24.0 * g(-3 * h);
        };
        // Next to a boundary only two same-side nodes exist. The one-sided
        // integrand is still smooth, so its exponential branch is continued
        // across x_n and the four-point rule runs the other way.
        auto down_branch = [&](double z) { return (1.0 - k.up_probability) * k.down_rate * std::exp(k.down_rate * z); };
        auto up_branch = [&](double z) { return k.up_probability * k.up_rate * std::exp(-k.up_rate * z); };
        auto add_right_short = [&](Stencil& s) {
            s.c[4] += 9.0 * h / 24.0 * up_branch(h);
            s.c[3] += 19.0 * h / 24.0 * g_plus;
            s.c[2] += -5.0 * h / 24.0 * up_branch(-h);
            s.c[1] += 1.0 * h / 24.0 * up_branch(-2 * h);
        };
        auto add_left_short = [&](Stencil& s) {
            s.c[2] += 9.0 * h / 24.0 * down_branch(-h);
            s.c[3] += 19.0 * h / 24.0 * g_minus;
            s.c[4] += -5.0 * h / 24.0 * down_branch(h);
            s.c[5] += 1.0 * h / 24.0 * down_branch(2 * h);
        };

        interior_stencil_ = base;
        add_left_full(interior_stencil_);
        add_right_full(interior_stencil_);
        first_stencil_ = base;
        add_left_short(first_stencil_);
        add_right_full(first_stencil_);
        last_stencil_ = base;
        add_left_full(last_stencil_);
        add_right_short(last_stencil_);
    }

    void add_jump_correction(std::span<const double> u, std::span<double> out) const {
        const int N = grid_.intervals;
        for (int n = 1; n < N; n += 2) {
            const Stencil& s = n == 1 ? first_stencil_ : (n == N - 1 ? last_stencil_ : interior_stencil_);
            double acc = 0.0;
            for (int k = -3; k <= 3; ++k) {
                const int j = n + k;
                if (j < 0 || j > N) continue;  // coefficients there are zero
                acc += s.c[k + 3] * u[j];
            }
            out[n - 1] += acc;
        }
    }

    void self_check() const {
        const std::size_t m = first_col_.size();
        std::vector<double> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = std::sin(0.7 * static_cast<double>(i) + 0.3) + 0.5;
        const auto fast = (*toeplitz_)(v);
        const auto dense = dense_toeplitz_matvec(first_col_, first_row_, v);
        double err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            err = std::max(err, std::abs(fast[i] - dense[i]));
            ref = std::max(ref, std::abs(dense[i]));
        }
        if (err > 1e-10 * std::max(ref, 1e-300))
            throw std::logic_error("FFT Toeplitz product disagrees with dense product");
    }

    GridSpec grid_;
    double intensity_;
    bool jump_at_zero_;
    std::vector<double> first_col_;
    std::vector<double> first_row_;
    std::shared_ptr<const ToeplitzMatvec> toeplitz_;
    std::vector<double> left_end_;
    std::vector<double> right_end_;
    std::vector<double> symbol_samples_;
    Stencil interior_stencil_;
    Stencil first_stencil_;
    Stencil last_stencil_;
};

inline std::complex<double> quadrature_symbol(const JumpConvolutionOperator& op, double theta) {
    return op.symbol(theta);
}

}  // namespace jdcompact
