#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "degenwave/discretization.hpp"

using namespace degenwave;

namespace {
std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = U(rng);
    return v;
}
} // namespace

TEST(Grid, Layout) {
    const Grid g(Weight::power(0.5), 10);
    EXPECT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g.h(), 0.1);
    EXPECT_DOUBLE_EQ(g.weights().front(), 0.05);
    EXPECT_DOUBLE_EQ(g.a_mid()[0], std::sqrt(0.05));
    EXPECT_EQ(g.first_active(), 1u);
    EXPECT_EQ(Grid(Weight::power(1.5), 10).first_active(), 0u);
    EXPECT_EQ(Grid(Weight::nonadmissible(2.0), 10).regime(), Regime::Strong);
    EXPECT_THROW(Grid(Weight::power(0.5), 2), DomainError);
}

class OperatorRegimes : public ::testing::TestWithParam<double> {};

TEST_P(OperatorRegimes, SymmetricAndNegative) {
    const Grid g(Weight::power(GetParam()), 64);
    auto u = random_vec(g.size(), 1), w = random_vec(g.size(), 2);
    project_admissible(g, u);
    project_admissible(g, w);
    const auto Au = apply_operator(g, u), Aw = apply_operator(g, w);
    EXPECT_NEAR(inner(g, Au, w), inner(g, u, Aw), 1e-9 * std::abs(inner(g, Au, w)));
    EXPECT_NEAR(-inner(g, Au, u), stiffness_sq(g, u), 1e-9 * stiffness_sq(g, u));
}

TEST_P(OperatorRegimes, NaturalBoundaryRowGreensIdentity) {
    // sum w_i (A u)_i v_i = flux * v_n - sum a_mid D+u D+v h, with u_n and v_n free
    const Grid g(Weight::power(GetParam()), 40);
    auto u = random_vec(g.size(), 3), v = random_vec(g.size(), 4);
    project_admissible(g, u, false);
    project_admissible(g, v, false);
    const double flux = 0.37;
    const auto Au = apply_operator(g, u, flux);
    double cross = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i)
        cross += g.a_mid()[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / g.h();
    EXPECT_NEAR(inner(g, Au, v), flux * v.back() - cross, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Theta, OperatorRegimes, ::testing::Values(0.0, 0.5, 1.0, 1.5, 1.9));

TEST(Elliptic, ExactForQuadraticWhenNondegenerate) {
    const Grid g(Weight::power(0.0), 50);
    const std::vector<double> f(g.size(), 1.0);
    const auto p = solve_elliptic(g, f);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(p[i], 0.5 * g.x(i) * (1 - g.x(i)), 1e-12);
}

TEST(Elliptic, StrongRegimeConverges) {
    // -(x^1.5 p')' = 1, flux 0 at 0, p(1) = 0: p = 2 (1 - sqrt(x)). The sqrt cusp at 0
    // caps the max-norm rate at 1/2; away from it the error is much smaller.
    std::vector<double> max_err, interior_err;
    for (std::size_t n : {100, 200, 400}) {
        const Grid g(Weight::power(1.5), n);
        const auto p = solve_elliptic(g, std::vector<double>(g.size(), 1.0));
        double e = 0.0, ei = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double d = std::abs(p[i] - 2 * (1 - std::sqrt(g.x(i))));
            e = std::max(e, d);
            if (g.x(i) >= 0.1) ei = std::max(ei, d);
        }
        max_err.push_back(e);
        interior_err.push_back(ei);
    }
    EXPECT_NEAR(std::log2(max_err[1] / max_err[2]), 0.5, 0.05);
    EXPECT_LT(interior_err[2], interior_err[1]);
    EXPECT_LT(interior_err[2], 0.2 * max_err[2]);
}

TEST(Tridiagonal, SolvesAndReportsSingularity) {
    Tridiagonal T({0, -1, -1}, {2, 2, 2}, {-1, -1, 0});
    std::vector<double> r{1, 0, 1};
    T.solve(r);
    EXPECT_NEAR(r[0], 1, 1e-15);
    EXPECT_NEAR(r[1], 1, 1e-15);
    EXPECT_NEAR(r[2], 1, 1e-15);
    EXPECT_THROW(Tridiagonal({0, 1}, {0, 1}, {1, 0}), NumericalError);
}

TEST(Energy, DampedAddsBoundaryPotential) {
    const Grid g(Weight::power(0.5), 20);
    GridState s;
    s.u.assign(g.size(), 0.0);
    s.v.assign(g.size(), 0.0);
    s.u.back() = 2.0;
    s.bc = LinearDamped{0.5};
    const double stiff = stiffness_sq(g, s.u);
    EXPECT_NEAR(discrete_energy(g, s), 0.5 * stiff + 0.5 * 0.5 * 1.0 * 4.0, 1e-12);
    EXPECT_THROW(check_size(g, std::vector<double>(3)), DomainError);
}

TEST(BoundaryFlux, OneSidedExactForQuadratics) {
    const Grid g(Weight::power(0.5), 16);
    GridState s;
    s.u.resize(g.size());
    s.v.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) s.u[i] = 1.0 - g.x(i);
    EXPECT_NEAR(boundary_flux(g, s), -1.0, 1e-13);
    for (std::size_t i = 0; i < g.size(); ++i) s.u[i] = (1.0 - g.x(i)) * (1.0 - g.x(i));
    EXPECT_NEAR(boundary_flux(g, s), 0.0, 1e-13);
}

TEST(Operator, FiniteAsThetaApproachesTwo) {
    for (double th : {1.99, 1.999999}) {
        const Grid g(Weight::power(th), 200);
        auto u = random_vec(g.size(), 5);
        project_admissible(g, u);
        for (double y : apply_operator(g, u)) EXPECT_TRUE(std::isfinite(y)) << th;
    }
}

// Discrete shadows of the trace limits at x = 0: x u^2 and x a u_x^2 at the
// first interior node go to zero under refinement for finite-energy data.
// u = x^alpha (1 - x) has int x^theta u_x^2 < inf iff alpha > (1 - theta)/2.
TEST(TraceShadows, VanishAtFirstNode) {
    for (double th : {0.5, 1.5}) {
        const double alpha = std::max(0.0, 0.5 * (1.0 - th)) + 0.05;
        double prev_u = INFINITY, prev_f = INFINITY;
        for (std::size_t n : {100, 200, 400, 800}) {
            const Grid g(Weight::power(th), n);
            std::vector<double> u(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::pow(g.x(i), alpha) * (1.0 - g.x(i));
            project_admissible(g, u);
            const double x1 = g.x(1);
            const double d = (u[1] - u[0]) / g.h();
            const double xu2 = x1 * u[1] * u[1], xau2 = x1 * g.a_mid()[0] * d * d;
            EXPECT_LT(xu2, prev_u) << th << " n=" << n;
            EXPECT_LT(xau2, prev_f) << th << " n=" << n;
            prev_u = xu2;
            prev_f = xau2;
        }
    }
}
