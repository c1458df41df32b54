#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace degenwave {

/// Gauss-Legendre rule on [-1, 1], nodes from Newton iteration on P_n.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (std::size_t k = 2; k <= N; ++k) {
                    double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(N) * (z * p1 - p0) / (z * z - 1.0);
                double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }

    static const GaussLegendre& instance() {
        static const GaussLegendre rule;
        return rule;
    }
};

/// Composite 16-point Gauss-Legendre over `panels` equal panels of [a, b].
template <class F>
double integrate_gl(F&& f, double a, double b, int panels) {
    const auto& rule = GaussLegendre<16>::instance();
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width, half = 0.5 * width, mid = lo + half;
        double s = 0.0;
        for (std::size_t i = 0; i < 16; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * s;
    }
    return total;
}

/// Trapezoid rule on samples with (possibly non-uniform) abscissae.
inline double trapezoid(std::span<const double> t, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

} // namespace degenwave
