#pragma once

// Bessel functions of the first kind, their first positive zeros, and the
// first eigenpair of -(x^theta y')' = lambda y on (0,1) with
// lim x^theta y' = 0 at 0 and y(1) = 0, theta in [1, 2).

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "quadrature.hpp"

namespace degenwave {

/// Order nu >= 0 of a Bessel function.
class BesselOrder {
public:
    explicit BesselOrder(double nu) : nu_(nu) {
        if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("Bessel order must be finite and >= 0");
    }
    double value() const { return nu_; }

private:
    double nu_;
};

namespace detail {

inline constexpr double kSeriesLimit = 8.0;

// sum_m (-1)^m (z^2/4)^m / (m! (nu+1)_m); J_nu(z) = (z/2)^nu / Gamma(nu+1) times this.
inline double bessel_series_normalized(double nu, double z) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int m = 0; m < 500; ++m) {
        term *= -q / ((m + 1.0) * (m + 1.0 + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

inline double bessel_series(double nu, double x) {
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    const double lead = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
    return lead * bessel_series_normalized(nu, x);
}

// Bessel's integral for real order:
// J_nu(x) = (1/pi) int_0^pi cos(nu t - x sin t) dt - (sin(nu pi)/pi) int_0^inf exp(-x sinh t - nu t) dt
inline double bessel_integral(double nu, double x) {
    using std::numbers::pi;
    const int panels = std::max(8, static_cast<int>(std::ceil((std::abs(nu) + x) / 3.0)));
    double first = integrate_gl([&](double t) { return std::cos(nu * t - x * std::sin(t)); }, 0.0, pi, panels);
    double result = first / pi;
    const double s = std::sin(nu * pi);
    if (std::abs(s) > 0.0) {
        const double tmax = std::asinh(40.0 / x) + (nu < 0 ? 1.0 : 0.0);
        double second = integrate_gl([&](double t) { return std::exp(-x * std::sinh(t) - nu * t); }, 0.0, tmax, 16);
        result -= s / pi * second;
    }
    return result;
}

// Any real order nu > -1, plus negative integers through J_{-n} = (-1)^n J_n.
inline double bessel_j_real(double nu, double x) {
    if (nu < 0.0 && nu == std::floor(nu)) {
        const double r = bessel_j_real(-nu, x);
        return (static_cast<long>(-nu) % 2 == 0) ? r : -r;
    }
    if (x <= kSeriesLimit) return bessel_series(nu, x);
    return bessel_integral(nu, x);
}

} // namespace detail

/// J_nu(x), x >= 0. Power series for x <= 8, Bessel's integral beyond.
inline double bessel_j(BesselOrder nu, double x) {
    if (!(x >= 0.0)) throw DomainError("bessel_j needs x >= 0");
    return detail::bessel_j_real(nu.value(), x);
}

inline double bessel_j(double nu, double x) { return bessel_j(BesselOrder(nu), x); }

/// J'_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x), x > 0.
inline double bessel_j_prime(BesselOrder nu, double x) {
    const double v = nu.value();
    if (x == 0.0) {
        if (v == 0.0) return 0.0;
        if (v == 1.0) return 0.5;
        return v < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return v / x * bessel_j(nu, x) - bessel_j(BesselOrder(v + 1.0), x);
}

/// Smallest positive zero j_nu of J_nu: scan from nu + 1 in steps of 1/4 for a sign
/// change (zeros are roughly pi apart), then bisect to the resolution of doubles.
inline double first_bessel_zero(BesselOrder nu) {
    const double v = nu.value();
    const double start = v + 1.0, stop = v + 20.0;
    double lo = start, flo = bessel_j(nu, lo);
    if (!(flo > 0.0)) throw NumericalError("J_nu(nu + 1) is not positive; Bessel evaluation is inconsistent");
    double hi = lo, fhi = flo;
    while (fhi > 0.0) {
        lo = hi, flo = fhi;
        hi += 0.25;
        if (hi > stop) throw NumericalError("no sign change of J_nu in [nu+1, nu+20] for nu = " + std::to_string(v));
        fhi = bessel_j(nu, hi);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = bessel_j(nu, mid);
        if (fm == 0.0) return mid;
        if (fm > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double first_bessel_zero(double nu) { return first_bessel_zero(BesselOrder(nu)); }

/// First eigenpair of the degenerate Sturm-Liouville problem for a(x) = x^theta.
class EigenPair {
public:
    explicit EigenPair(double theta) : theta_(theta) {
        if (!(theta >= 1.0 && theta < 2.0)) throw DomainError("first_eigenpair needs theta in [1,2)");
        nu_ = (theta - 1.0) / (2.0 - theta);
        kappa_ = (2.0 - theta) / 2.0;
        j_ = first_bessel_zero(nu_);
        lambda_ = kappa_ * kappa_ * j_ * j_;
        jprime_ = bessel_j_prime(BesselOrder(nu_), j_);
        norm_ = std::sqrt(2.0 * kappa_) / std::abs(jprime_);
        log_lead_ = nu_ * std::log(0.5 * j_) - std::lgamma(nu_ + 1.0);
    }

    double theta() const { return theta_; }
    double nu() const { return nu_; }
    double kappa() const { return kappa_; }
    double j_nu() const { return j_; }
    double lambda() const { return lambda_; }
    /// sqrt(2 kappa) / |J'_nu(j_nu)|
    double normalization() const { return norm_; }

    /// y_theta(x) on [0,1]. The factor x^{(1-theta)/2} cancels against J_nu's
    /// x^{kappa nu} behaviour, so y is bounded and y(0) is its limit.
    double operator()(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) throw DomainError("eigenfunction evaluated outside [0,1]");
        const double z = j_ * std::pow(x, kappa_);
        if (z <= detail::kSeriesLimit)
            return norm_ * std::exp(log_lead_) * detail::bessel_series_normalized(nu_, z);
        return norm_ * std::pow(x, 0.5 * (1.0 - theta_)) * detail::bessel_integral(nu_, z);
    }

    /// y'_theta(1) = norm * kappa * j_nu * J'_nu(j_nu)
    double derivative_at_1() const { return norm_ * kappa_ * j_ * jprime_; }

    /// Closed-form ratio int_0^T u_x(t,1)^2 dt / E(0) for u = sin(sqrt(lambda) t) y(x):
    /// 2 T kappa (1 - sin(2 sqrt(lambda) T) / (2 sqrt(lambda) T)).
    double trace_ratio(double T) const {
        const double w = 2.0 * std::sqrt(lambda_) * T;
        return 2.0 * T * kappa_ * (1.0 - std::sin(w) / w);
    }

    /// Same ratio for u = sin(sqrt(lambda) t + phase) y, whose energy is lambda/2
    /// for every phase: 2 T kappa - kappa (sin(2wT + 2 phase) - sin(2 phase)) / w.
    double trace_ratio(double T, double phase) const {
        const double w = std::sqrt(lambda_);
        return 2.0 * T * kappa_ - kappa_ * (std::sin(2.0 * w * T + 2.0 * phase) - std::sin(2.0 * phase)) / w;
    }

    /// Phase minimizing trace_ratio(T, phase); the minimum is
    /// 2 T kappa - 2 kappa |sin(wT)| / w <= (2 - theta) T.
    double optimal_phase(double T) const {
        const double w = std::sqrt(lambda_);
        return std::sin(w * T) >= 0.0 ? -0.5 * w * T : 0.5 * (std::numbers::pi - w * T);
    }

    double min_trace_ratio(double T) const { return trace_ratio(T, optimal_phase(T)); }

private:
    double theta_, nu_, kappa_, j_, lambda_, jprime_, norm_, log_lead_;
};

inline EigenPair first_eigenpair(double theta) { return EigenPair(theta); }

} // namespace degenwave
