#include <gtest/gtest.h>

#include <cmath>

#include "degenwave/dynamics.hpp"

using namespace degenwave;

namespace {
SimConfig base(double theta, std::size_t n, double T) {
    SimConfig c;
    c.weight = Weight::power(theta);
    c.grid_n = n;
    c.T_final = T;
    c.initial_data = RandomSmoothData{5};
    return c;
}
double max_drift(const EnergyTrace& tr) {
    double d = 0.0;
    for (double e : tr.energy) d = std::max(d, std::abs(e / tr.energy.front() - 1.0));
    return d;
}
} // namespace

class Conservation : public ::testing::TestWithParam<double> {};

TEST_P(Conservation, MidpointConservesEnergy) {
    const auto res = simulate_conservative(base(GetParam(), 100, 3.0));
    EXPECT_LT(max_drift(res.trace), 1e-11);
}

TEST_P(Conservation, LeapfrogEnergyStaysClose) {
    auto c = base(GetParam(), 100, 3.0);
    c.integrator = Integrator::Leapfrog;
    c.dt = 0.2 / 100;
    EXPECT_LT(max_drift(simulate_conservative(c).trace), 1e-2);
}

INSTANTIATE_TEST_SUITE_P(Theta, Conservation, ::testing::Values(0.0, 0.5, 1.5));

TEST(Dynamics, TimeReversible) {
    const Grid g(Weight::power(0.5), 60);
    GridState s = make_initial_state(g, RandomSmoothData{2});
    const GridState s0 = s;
    MidpointStepper fwd(g, Dirichlet{}, 0.01), back(g, Dirichlet{}, -0.01);
    for (int k = 0; k < 100; ++k) fwd.step(s);
    for (int k = 0; k < 100; ++k) back.step(s);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(s.u[i], s0.u[i], 1e-11);
        EXPECT_NEAR(s.v[i], s0.v[i], 1e-11);
    }
    EXPECT_THROW(MidpointStepper(g, LinearDamped{1.0}, -0.01), DomainError);
}

TEST(Dynamics, DampedEnergyNonincreasing) {
    for (const BoundaryCondition& bc :
         {BoundaryCondition{LinearDamped{1.0}}, BoundaryCondition{NonlinearDamped{1.0, FeedbackLaw::parse("poly:3")}},
          BoundaryCondition{NonlinearDamped{0.5, FeedbackLaw::parse("expinvsq")}}}) {
        auto c = base(0.5, 80, 5.0);
        c.bc = bc;
        const auto res = simulate(c);
        for (std::size_t k = 1; k < res.trace.size(); ++k)
            EXPECT_LE(res.trace.energy[k], res.trace.energy[k - 1] * (1 + 1e-13));
        EXPECT_LT(res.trace.energy.back(), res.trace.energy.front());
    }
}

TEST(Dynamics, NonlinearWithLinearLawMatchesLinearDamping) {
    auto a = base(1.5, 60, 2.0), b = a;
    a.bc = LinearDamped{1.0};
    b.bc = NonlinearDamped{1.0, FeedbackLaw::linear()};
    const auto ra = simulate(a), rb = simulate(b);
    EXPECT_NEAR(ra.trace.energy.back(), rb.trace.energy.back(), 1e-12);
}

TEST(Dynamics, EigenDataEnergyAndDeterminism) {
    const Grid g(Weight::power(1.5), 800);
    const auto s = make_initial_state(g, EigenData{1.5});
    const EigenPair ep(1.5);
    EXPECT_NEAR(discrete_energy(g, s) / (0.5 * ep.lambda()), 1.0, 1e-3);
    const auto r1 = make_initial_state(g, RandomSmoothData{9}), r2 = make_initial_state(g, RandomSmoothData{9});
    EXPECT_EQ(r1.u, r2.u);
    EXPECT_EQ(r1.v, r2.v);
    EXPECT_NE(r1.u, make_initial_state(g, RandomSmoothData{10}).u);
}

TEST(Dynamics, RejectsBadConfig) {
    auto c = base(0.5, 50, -1.0);
    EXPECT_THROW(simulate(c), DomainError);
    c = base(0.5, 50, 1.0);
    c.record_every = 0;
    EXPECT_THROW(simulate(c), DomainError);
    c = base(0.5, 50, 1.0);
    c.bc = LinearDamped{1.0};
    c.integrator = Integrator::Leapfrog;
    EXPECT_THROW(simulate(c), DomainError);
    EXPECT_THROW(simulate_conservative(c), DomainError);
    c = base(0.5, 50, 1.0);
    c.initial_data = SamplesData{"/nonexistent.csv"};
    EXPECT_THROW(simulate(c), DomainError);
}

TEST(Dynamics, TraceIntegralMatchesEveryStepSampling) {
    auto c = base(0.5, 100, 2.0);
    const auto full = simulate_conservative(c);
    c.record_every = 37;
    const auto sparse = simulate_conservative(c);
    EXPECT_DOUBLE_EQ(full.trace.cumulative_trace.back(), sparse.trace.cumulative_trace.back());
    EXPECT_LT(sparse.trace.size(), full.trace.size());
}

TEST(Multipliers, IdentitiesHoldAndConverge) {
    auto c = base(1.5, 100, 2.0);
    c.initial_data = RandomSmoothData{3};
    const auto coarse = verify_multiplier_identities(c);
    c.grid_n = 200;
    const auto fine = verify_multiplier_identities(c);
    EXPECT_LT(coarse.le1_residual, 1e-2);
    EXPECT_LT(fine.le1_residual, coarse.le1_residual / 2.5);
    EXPECT_LT(fine.le2_residual, 1e-5);
}

TEST(AuxiliaryElliptic, BoundsHold) {
    for (double th : {0.0, 0.5, 1.5}) {
        const auto r = solve_auxiliary_elliptic(Weight::power(th), 1.0, 0.7);
        EXPECT_TRUE(r.energy_ok) << th;
        EXPECT_TRUE(r.l2_ok) << th;
    }
    // weak case closed form: z = c x^{1-theta}/(1-theta), c = lambda / (1 + beta/(1-theta))
    const auto r = solve_auxiliary_elliptic(Weight::power(0.5), 1.0, 0.7);
    EXPECT_NEAR(r.c, 0.7 / 3.0, 1e-12);
    EXPECT_NEAR(r.z.back(), 0.7 / 3.0 * 2.0, 1e-12);
    EXPECT_THROW(solve_auxiliary_elliptic(Weight::power(0.5), 0.0, 1.0), DomainError);
}
