#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "degenwave/weights.hpp"

using namespace degenwave;

TEST(Weights, PowerRegimes) {
    EXPECT_EQ(Weight::power(0.0).regime(), Regime::Weak);
    EXPECT_EQ(Weight::power(0.5).regime(), Regime::Weak);
    EXPECT_EQ(Weight::power(1.0).regime(), Regime::Strong);
    EXPECT_EQ(Weight::power(1.5).regime(), Regime::Strong);
    EXPECT_DOUBLE_EQ(Weight::power(1.5).mu_a(), 1.5);
    EXPECT_DOUBLE_EQ(Weight::power(0.7).a(0.25), std::pow(0.25, 0.7));
    EXPECT_DOUBLE_EQ(Weight::power(0.0).a(0.0), 1.0);
}

TEST(Weights, RejectsInadmissible) {
    EXPECT_THROW(Weight::power(2.0), DomainError);
    EXPECT_THROW(Weight::power(-0.1), DomainError);
    EXPECT_THROW(Weight::power(0.5).a(1.5), DomainError);
    EXPECT_NO_THROW(Weight::nonadmissible(2.0));
    EXPECT_FALSE(Weight::nonadmissible(2.5).admissible());
    EXPECT_THROW(compute_constants(Weight::nonadmissible(2.0)), DomainError);
}

TEST(Weights, OscillatoryMuBetweenThetaAndThetaPlusAlpha) {
    const auto w = Weight::make(OscillatoryPower{0.5, 0.3});
    EXPECT_GE(w.mu_a(), 0.5);
    EXPECT_LE(w.mu_a(), 0.5 + 0.3 + 1e-12);
    // the sup of |theta (1+s^2) + alpha sin 2phi| / (1+s^2) is attained away from 0 for small alpha
    EXPECT_GT(w.mu_a(), 0.6);
    EXPECT_THROW(Weight::make(OscillatoryPower{1.5, 0.3}), DomainError);
}

TEST(Weights, ConstantsForHalfPower) {
    // hand values at theta = 0.5, a(1) = 1: C_a = 2/3, C'_a = 4/3, T_a = 8/3 + sqrt(2/3)
    const auto k = compute_constants(Weight::power(0.5));
    EXPECT_NEAR(k.C_a, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.C_a_prime, 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.T_a, 8.0 / 3.0 + std::sqrt(2.0 / 3.0), 1e-14);
    EXPECT_FALSE(k.M_a_beta.has_value());
}

TEST(Weights, StabilizationConstantMatchesIndependentOracle) {
    // exact-rational evaluation (Python fractions) of the same closed form
    const auto k = compute_constants(Weight::power(0.5), 1.0);
    ASSERT_TRUE(k.M_a_beta.has_value());
    EXPECT_NEAR(*k.alpha_a, 0.5, 1e-15);
    EXPECT_NEAR(*k.eta_2, 97.0 / 32.0, 1e-15);
    EXPECT_NEAR(*k.C_a_doubleprime, 7.0 / 3.0, 1e-15);
    EXPECT_NEAR(*k.M_a_beta, 69.9923235180714, 1e-11);
}

TEST(Weights, BracketAndDirectBound) {
    const auto w = Weight::power(1.5);
    const auto k = compute_constants(w);
    EXPECT_NEAR(observability_bracket(w, 2.0 * k.T_a), 0.5 * 2.0 * k.T_a - 4.0 - 3.0 * std::sqrt(k.C_a), 1e-12);
    EXPECT_DOUBLE_EQ(direct_bound(w, 5.0), 31.0);
    // T_a is sufficient, not sharp: the bracket turns positive at (4 + 2 mu sqrt(C_a)) / (2 - mu)
    const double T0 = (4.0 + 3.0 * std::sqrt(k.C_a)) / 0.5;
    EXPECT_GT(observability_bracket(w, 1.01 * T0), 0.0);
    EXPECT_LT(observability_bracket(w, 0.99 * T0), 0.0);
    EXPECT_GT(observability_bracket(w, 2.0 * k.T_a), 0.0);
}

TEST(Weights, TabulatedPowerLawRecoversMu) {
    Tabulated t;
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        t.x.push_back(x);
        t.a.push_back(std::pow(x, 0.8));
        t.aprime.push_back(i == 0 ? 0.0 : 0.8 * std::pow(x, -0.2));
    }
    const auto w = Weight::make(t);
    EXPECT_NEAR(w.mu_a(), 0.8, 5e-3);  // derivative read off the table
    EXPECT_EQ(w.regime(), Regime::Weak);
    EXPECT_NEAR(w.a(0.123), std::pow(0.123, 0.8), 1e-6);
}

TEST(Weights, TableFileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "degenwave_weight_table.csv";
    {
        std::ofstream f(path);
        f << "x,a\n";
        for (int i = 0; i <= 50; ++i) f << i / 50.0 << ',' << std::pow(i / 50.0, 1.2) << '\n';
    }
    const auto t = read_weight_table(path.string());
    EXPECT_EQ(t.x.size(), 51u);
    EXPECT_TRUE(t.aprime.empty());
    const auto w = Weight::make(t);
    EXPECT_EQ(w.regime(), Regime::Strong);
    EXPECT_THROW(read_weight_table("/nonexistent/table.csv"), DomainError);
}
