#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "degenwave/quadrature.hpp"
#include "degenwave/spectral.hpp"

using namespace degenwave;

TEST(Bessel, AgreesWithBoost) {
    for (double nu : {0.0, 0.5, 1.0, 2.0 / 3.0, 4.0, 19.0})
        for (double x : {0.1, 1.0, 3.7, 8.5, 15.0, 30.0})
            EXPECT_NEAR(bessel_j(nu, x), boost::math::cyl_bessel_j(nu, x), 1e-12) << nu << " " << x;
}

TEST(Bessel, HalfOrderClosedForm) {
    for (double x : {0.3, 2.0, 9.0})
        EXPECT_NEAR(bessel_j(0.5, x), std::sqrt(2.0 / (std::numbers::pi * x)) * std::sin(x), 1e-13);
    EXPECT_NEAR(first_bessel_zero(0.5), std::numbers::pi, 1e-12);
}

TEST(Bessel, DerivativeIdentity) {
    // J'_nu = (J_{nu-1} - J_{nu+1}) / 2
    for (double nu : {1.0, 2.5})
        for (double x : {0.7, 5.0})
            EXPECT_NEAR(bessel_j_prime(BesselOrder(nu), x),
                        0.5 * (boost::math::cyl_bessel_j(nu - 1, x) - boost::math::cyl_bessel_j(nu + 1, x)), 1e-12);
}

TEST(Bessel, ZerosMatchBoost) {
    for (double nu : {0.0, 1.0, 4.0, 19.0})
        EXPECT_NEAR(first_bessel_zero(nu), boost::math::cyl_bessel_j_zero(nu, 1), 1e-10);
    EXPECT_THROW(BesselOrder(-1.0), DomainError);
}

TEST(EigenPair, NormalizedAndSatisfiesBoundaryCondition) {
    for (double th : {1.0, 1.5, 1.8}) {
        const EigenPair ep(th);
        EXPECT_NEAR(ep.kappa(), (2 - th) / 2, 1e-15);
        EXPECT_NEAR(ep.lambda(), ep.kappa() * ep.kappa() * ep.j_nu() * ep.j_nu(), 1e-12);
        EXPECT_NEAR(ep(1.0), 0.0, 1e-12);
        // x = s^{1/kappa} resolves the layer at 0
        const double k = ep.kappa();
        const double n2 = integrate_gl(
            [&](double s) {
                const double x = std::min(1.0, std::pow(s, 1.0 / k));
                return ep(x) * ep(x) * std::pow(s, 1.0 / k - 1.0) / k;
            },
            0.0, 1.0, 64);
        EXPECT_NEAR(n2, 1.0, 1e-6) << th;
    }
    EXPECT_THROW(EigenPair(0.5), DomainError);
    EXPECT_THROW(EigenPair(2.0), DomainError);
}

TEST(EigenPair, RayleighQuotientIsLambda) {
    const EigenPair ep(1.5);
    const double h = 1e-6;
    auto dy = [&](double x) { return (ep(std::min(1.0, x + h)) - ep(std::max(0.0, x - h))) / (std::min(1.0, x + h) - std::max(0.0, x - h)); };
    const double num = integrate_gl([&](double x) { return std::pow(x, 1.5) * dy(x) * dy(x); }, 0.0, 1.0, 64);
    EXPECT_NEAR(num, ep.lambda(), 1e-4 * ep.lambda());
}

TEST(EigenPair, TraceRatioForms) {
    const EigenPair ep(1.5);
    const double T = 10;
    EXPECT_NEAR(ep.trace_ratio(T, 0.0), ep.trace_ratio(T), 1e-12);
    // the optimal phase is no worse than any sampled phase and never above (2 - theta) T
    for (int k = 0; k < 64; ++k) EXPECT_LE(ep.min_trace_ratio(T), ep.trace_ratio(T, k * std::numbers::pi / 64) + 1e-12);
    for (double th : {1.0, 1.3, 1.5, 1.8, 1.95}) EXPECT_LE(EigenPair(th).min_trace_ratio(T), (2 - th) * T);
}
