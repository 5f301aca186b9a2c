#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "jdcompact/smoothing.hpp"
#include "oracles.hpp"

using namespace jdcompact;

namespace {

const SmoothingKernel& kernel() {
    static const SmoothingKernel k = build_kernel();
    return k;
}

// (1/dx) int phi4(y/dx) u0(x - y) dy with u0 = (K - S0 e^x)^+, on the natural
// pieces of the integrand. The kernel itself is checked against the inverse
// transform separately.
double smoothed_put_by_quadrature(double x, double dx, double K = 100.0, double S0 = 100.0) {
    auto f = [&](double s) { return phi4(s) * std::max(K - S0 * std::exp(x - s * dx), 0.0); };
    std::vector<double> cuts{-3, -2, -1, 0, 1, 2, 3};
    const double sk = (x - std::log(K / S0)) / dx;
    if (sk > -3 && sk < 3) cuts.push_back(sk);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) total += oracle::integrate(f, cuts[i], cuts[i + 1]);
    return total;
}

}  // namespace

TEST(Smoothing, ClosedFormMatchesInverseTransform) {
    for (double s : {0.0, 0.25, 0.5, 1.0, 1.37, 2.0, 2.5, 2.99, -0.8, -1.6})
        EXPECT_NEAR(phi4(s), oracle::phi4_by_inverse_transform(s), 1e-8) << "s=" << s;
    EXPECT_EQ(kernel()(3.0), 0.0);
    EXPECT_EQ(kernel()(-3.5), 0.0);
}

TEST(Smoothing, SymbolAtZeroAndDecay) {
    EXPECT_EQ(phi4_hat(0.0), 1.0);
    EXPECT_NEAR(phi4_hat(2.0 * std::numbers::pi), 0.0, 1e-15);
}

TEST(Smoothing, UnitMassAndVanishingSecondMoment) {
    EXPECT_NEAR(kernel().normalization(), 1.0, 1e-8);
    const double mass = oracle::integrate([](double s) { return phi4(s); }, -3.0, 3.0);
    const double m2 = oracle::integrate([](double s) { return s * s * phi4(s); }, -3.0, 3.0);
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_NEAR(m2, 0.0, 1e-12);
}

TEST(Smoothing, TableSamplesTheKernel) {
    const auto& k = kernel();
    ASSERT_EQ(k.table().size(), static_cast<std::size_t>(6 * k.resolution() + 1));
    for (std::size_t j = 0; j < k.table().size(); j += 97) EXPECT_EQ(k.table()[j], phi4(k.sample_position(j)));
    EXPECT_THROW(SmoothingKernel(16), ConfigError);
}

TEST(Smoothing, ReproducesCubics) {
    const GridSpec g(2.0, 64, 10, 0.25);
    const std::vector<int> nodes{10, 32, 50};
    const auto one = smooth_initial_condition(kernel(), [](double) { return 1.0; }, g, nodes, 0.0);
    for (double v : one) EXPECT_NEAR(v, 1.0, 1e-8);
    auto cubic = [](double x) { return 0.5 - x + 2.0 * x * x - 0.7 * x * x * x; };
    const auto c = smooth_initial_condition(kernel(), cubic, g, nodes, 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) EXPECT_NEAR(c[i], cubic(g.x(nodes[i])), 1e-12);
}

TEST(Smoothing, KinkNodeMatchesAdaptiveQuadrature) {
    const GridSpec g(2.0, 128, 10, 0.25);
    const Contract put;
    const auto nodes = smoothing_window(g, put.kink());
    ASSERT_EQ(nodes, (std::vector<int>{61, 62, 63, 64, 65, 66, 67}));
    const auto vals = smooth_initial_condition(kernel(), [&](double x) { return payoff(put, x); }, g, nodes, 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        EXPECT_NEAR(vals[i], smoothed_put_by_quadrature(g.x(nodes[i]), g.dx()), 1e-8);
}

TEST(Smoothing, OffGridKink) {
    const GridSpec g(2.0, 128, 10, 0.25);
    const Contract put(OptionSide::Put, 97.0, 100.0, 0.25);
    const auto nodes = smoothing_window(g, put.kink());
    ASSERT_EQ(nodes.size(), 6u);
    const auto vals = smooth_initial_condition(kernel(), [&](double x) { return payoff(put, x); }, g, nodes,
                                               put.kink());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        EXPECT_NEAR(vals[i], smoothed_put_by_quadrature(g.x(nodes[i]), g.dx(), 97.0), 1e-8);
}

TEST(Smoothing, OnlyWindowNodesChange) {
    const GridSpec g(2.0, 64, 10, 0.25);
    const Contract put;
    std::vector<double> u(g.size());
    for (int n = 0; n <= 64; ++n) u[n] = payoff(put, g.x(n));
    const auto before = u;
    apply_smoothing(kernel(), [&](double x) { return payoff(put, x); }, g, u, 0.0);
    for (int n = 0; n <= 64; ++n) {
        if (std::abs(n - 32) > 3) {
            EXPECT_EQ(u[n], before[n]);
        }
    }
    EXPECT_NE(u[32], before[32]);
}

TEST(Smoothing, NodesNearBoundaryAreRejected) {
    const GridSpec g(2.0, 64, 10, 0.25);
    const std::vector<int> nodes{2};
    EXPECT_THROW(smooth_initial_condition(kernel(), [](double) { return 0.0; }, g, nodes, 0.0), std::out_of_range);
}
