#pragma once

// Decay rates for nonlinear boundary feedback via the optimal-weight convexity
// construction. From the growth g of the feedback near 0:
//   H(x)      = sqrt(x) g(sqrt(x))           on [0, r0^2], +inf beyond
//   H*(y)     = sup_x { x y - H(x) }         (convex conjugate of the extension)
//   L(y)      = H*(y) / y,  L(0) = 0
//   Lambda(x) = H(x) / (x H'(x))
//   psi0(x)   = 1/H'(r0^2) + int_{1/x}^{H'(r0^2)} dy / (y^2 (1 - Lambda((H')^{-1}(y))))
// and the envelope 2 gamma L(1 / psi0^{-1}(t / M)).
//
// Everything that can underflow (H' of exp(-1/s^2) type laws, psi0 at large
// arguments) is carried in logarithms. The working L and L^{-1} go through the
// stationarity condition y = H'(x), where L(y) = x (1 - Lambda(x)); the grid
// conjugate is kept alongside as an independent check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "feedback.hpp"
#include "quadrature.hpp"

namespace degenwave {

class DecayModel {
public:
    static constexpr std::size_t kGridPoints = 2000;
    static constexpr double kGridDecades = 12.0;

    DecayModel(FeedbackLaw law, double r0_requested = 0.5) : law_(std::move(law)), r0_requested_(r0_requested) {
        if (!(r0_requested > 0.0 && r0_requested <= 1.0)) throw DomainError("r0 must lie in (0, 1]");
        // H linear (g(s) = c s) is the exponential regime: no strict convexity, H'(0) != 0
        if (law_.is_linear() || (std::holds_alternative<PolynomialFeedback>(law_.kind()) &&
                                 std::get<PolynomialFeedback>(law_.kind()).p == 1.0)) {
            exponential_ = true;
            r0_ = r0_requested;
            return;
        }
        r0_ = r0_requested;
        while (!convex_on_grid(r0_ * r0_)) {
            r0_ *= 0.5;
            ++halvings_;
            if (r0_ < 1e-4) throw DomainError("H is not strictly convex for any r0 >= 1e-4; feedback '" + law_.name() + "' rejected");
        }
        r2_ = r0_ * r0_;
        build_grid();
        build_psi_table();
    }

    const FeedbackLaw& law() const { return law_; }
    bool exponential_regime() const { return exponential_; }
    double r0() const { return r0_; }
    double r0_requested() const { return r0_requested_; }
    int halvings() const { return halvings_; }
    const std::vector<double>& grid() const { require_nonlinear(); return xs_; }

    // ------------------------------------------------------------ H and friends

    double H(double x) const {
        if (x <= 0.0) return 0.0;
        const double s = std::sqrt(x);
        return s * law_.g(s);
    }
    /// ln H'(x) as a function of lx = ln x; H'(x) = g(s) (1 + s g'(s)/g(s)) / (2 s), s = sqrt(x).
    double log_H_prime_at_log(double lx) const {
        const double ls = 0.5 * lx;
        const double lg = law_.log_g_at_log(ls);
        if (std::isinf(lg)) return lg;  // exp(-1/s^2) below s ~ 1e-154
        return lg - std::log(2.0) - ls + std::log1p(law_.elasticity_at_log(ls));
    }
    double log_H_prime(double x) const { return log_H_prime_at_log(std::log(x)); }
    /// Lambda_H(x) = 2 / (1 + s g'(s)/g(s)) as a function of lx = ln x.
    double lambda_at_log(double lx) const { return 2.0 / (1.0 + law_.elasticity_at_log(0.5 * lx)); }
    double H_prime(double x) const { return x <= 0.0 ? 0.0 : std::exp(log_H_prime(x)); }

    /// H / (x H') = 2 / (1 + s g'(s)/g(s)) with s = sqrt(x).
    double lambda_H(double x) const {
        if (!(x > 0.0)) throw DomainError("Lambda_H is evaluated on (0, r0^2]");
        return lambda_at_log(std::log(x));
    }
    /// Same quantity from a central difference of H, for cross-checking.
    double lambda_H_numeric(double x) const {
        const double d = 1e-5 * x;
        const double hp = (H(x + d) - H(x - d)) / (2.0 * d);
        return H(x) / (x * hp);
    }

    double H_prime_at_r0() const { require_nonlinear(); return std::exp(log_Hp_r0_); }

    /// ln x with ln H'(x) = ly, clamped to r0^2 from above.
    double log_H_prime_inverse(double ly) const {
        require_nonlinear();
        if (ly >= log_Hp_r0_) return std::log(r2_);
        double lo = std::log(r2_) - 1e4, hi = std::log(r2_);
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (log_H_prime_at_log(mid) < ly ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    double H_prime_inverse(double y) const {
        if (y <= 0.0) return 0.0;
        return std::exp(log_H_prime_inverse(std::log(y)));
    }

    // ------------------------------------------------------------ conjugate and L

    /// Grid conjugate: max over {0} and the log grid, then golden refinement
    /// between the neighbours of the best node.
    double Hstar_numeric(double y) const {
        require_nonlinear();
        if (y <= 0.0) return 0.0;  // sup attained at x = 0
        auto phi = [&](double x) { return x * y - H(x); };
        std::size_t best = 0;
        double fbest = phi(xs_[0]);
        for (std::size_t k = 1; k < xs_.size(); ++k) {
            const double f = phi(xs_[k]);
            if (f > fbest) fbest = f, best = k;
        }
        double a = best == 0 ? 0.0 : xs_[best - 1];
        double b = best + 1 < xs_.size() ? xs_[best + 1] : xs_.back();
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - ratio * (b - a), d = a + ratio * (b - a);
        double fc = phi(c), fd = phi(d);
        for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
            if (fc > fd) b = d, d = c, fd = fc, c = b - ratio * (b - a), fc = phi(c);
            else a = c, c = d, fc = fd, d = a + ratio * (b - a), fd = phi(d);
        }
        return std::max({fbest, fc, fd, phi(xs_.back()), 0.0});
    }
    double L_numeric(double y) const { return y <= 0.0 ? 0.0 : Hstar_numeric(y) / y; }

    double L(double y) const {
        require_nonlinear();
        if (y <= 0.0) return 0.0;
        if (std::log(y) >= log_Hp_r0_) return r2_ - H(r2_) / y;
        const double lx = log_H_prime_inverse(std::log(y));
        return std::exp(lx) * (1.0 - lambda_at_log(lx));
    }
    double Hstar(double y) const { return y * L(y); }

    /// L at the end of the interior branch, L(H'(r0^2)) = r0^2 (1 - Lambda(r0^2)).
    double L_at_r0() const { require_nonlinear(); return r2_ * (1.0 - lambda_H(r2_)); }

    double L_inverse(double z) const {
        require_nonlinear();
        if (z <= 0.0) return 0.0;
        if (z >= r2_) throw DomainError("L maps onto [0, r0^2); no preimage for " + std::to_string(z));
        if (z >= L_at_r0()) return H(r2_) / (r2_ - z);
        // x (1 - Lambda(x)) is increasing (its derivative is H H'' / H'^2)
        double lo = std::log(r2_) - 1e4, hi = std::log(r2_);
        const double lz = std::log(z);
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (mid + std::log(1.0 - lambda_at_log(mid)) < lz ? lo : hi) = mid;
        }
        return std::exp(log_H_prime_at_log(0.5 * (lo + hi)));
    }

    // ------------------------------------------------------------ psi0

    /// psi0 lives on [s0, inf) with s0 = 1/H'(r0^2).
    double psi0_origin() const { require_nonlinear(); return std::exp(-log_Hp_r0_); }

    double psi0(double x) const {
        require_nonlinear();
        if (x < psi0_origin()) throw DomainError("psi0 is defined for x >= 1/H'(r0^2)");
        const double u = std::max(std::log(x), us_.front());  // ln s0 can round below the first node
        const std::size_t j = table_index(u);
        return psi_[j] + psi_segment(us_[j], u);
    }

    /// ln of psi0^{-1}(tau).
    double log_psi0_inverse(double tau) const {
        require_nonlinear();
        if (tau < psi_.front()) throw DomainError("psi0^{-1} needs tau >= 1/H'(r0^2)");
        if (tau > psi_.back()) throw DomainError("t/M beyond the tabulated range of psi0");
        const auto it = std::upper_bound(psi_.begin(), psi_.end(), tau);
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - psi_.begin()), psi_.size() - 1) - 1;
        double lo = us_[j], hi = us_[j + 1];
        double u = lo + (hi - lo) * (std::log(tau) - std::log(psi_[j])) / (std::log(psi_[j + 1]) - std::log(psi_[j]));
        for (int k = 0; k < 60; ++k) {
            const double f = psi_[j] + psi_segment(us_[j], u) - tau;
            if (std::abs(f) <= 1e-14 * tau) break;
            (f < 0 ? lo : hi) = u;
            double next = u - f / (std::exp(u) * integrand(u));
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            u = next;
        }
        return u;
    }

    // ------------------------------------------------------------ envelopes

    /// First time at which the envelope is defined: M / H'(r0^2).
    double envelope_start(double M) const { return M * psi0_origin(); }

    /// ln of 2 gamma L(1/psi0^{-1}(t/M)); nullopt before the validity threshold.
    std::optional<double> log_envelope(double t, double gamma, double M) const {
        require_nonlinear();
        if (t < envelope_start(M)) return std::nullopt;
        const double u = log_psi0_inverse(t / M);
        const double lx = log_H_prime_inverse(-u);
        return std::log(2.0 * gamma) + lx + std::log(1.0 - lambda_at_log(lx));
    }

    /// ln of 2 gamma (H')^{-1}(kappa M / t); nullopt while kappa M / t > H'(r0^2).
    std::optional<double> log_simplified_envelope(double t, double gamma, double M, double kappa) const {
        require_nonlinear();
        const double ly = std::log(kappa * M) - std::log(t);
        if (ly > log_Hp_r0_) return std::nullopt;
        return std::log(2.0 * gamma) + log_H_prime_inverse(ly);
    }

    /// Smallest gamma the envelope theorem allows: E0 / (2 L(H'(r0^2))).
    double gamma_threshold(double E0) const { return E0 / (2.0 * L_at_r0()); }

    double lambda_sup() const { require_nonlinear(); return lambda_sup_; }
    /// Lambda_H at the smallest grid point, a proxy for its limit at 0.
    double lambda_near_zero() const { require_nonlinear(); return lambda_H(xs_.front()); }

    bool lambda_in_unit_interval() const {
        for (double x : xs_) {
            const double l = lambda_H(x);
            if (!(l >= 0.0 && l <= 1.0)) return false;
        }
        return true;
    }

private:
    void require_nonlinear() const {
        if (exponential_)
            throw DomainError("feedback '" + law_.name() +
                              "' is in the exponential regime; use the linear stabilization constants");
    }

    static std::vector<double> log_grid(double top) {
        std::vector<double> xs(kGridPoints);
        for (std::size_t k = 0; k < kGridPoints; ++k)
            xs[k] = top * std::pow(10.0, -kGridDecades * (1.0 - static_cast<double>(k) / (kGridPoints - 1)));
        xs.back() = top;
        return xs;
    }

    // H' increasing on the grid, and positive second differences of H wherever H
    // is representable.
    bool convex_on_grid(double top) const {
        const auto xs = log_grid(top);
        double prev_lhp = -std::numeric_limits<double>::infinity();
        for (double x : xs) {
            const double l = log_H_prime(x);
            if (!std::isfinite(l) && l != -std::numeric_limits<double>::infinity()) return false;
            if (!(l > prev_lhp)) return false;
            prev_lhp = l;
        }
        double prev_slope = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < xs.size(); ++k) {
            const double h0 = H(xs[k - 1]), h1 = H(xs[k]);
            if (!(h0 > std::numeric_limits<double>::min())) continue;
            const double slope = (h1 - h0) / (xs[k] - xs[k - 1]);
            if (!(slope > prev_slope)) return false;
            prev_slope = slope;
        }
        return true;
    }

    void build_grid() {
        xs_ = log_grid(r2_);
        log_Hp_r0_ = log_H_prime(r2_);
        lambda_sup_ = 0.0;
        for (double x : xs_) lambda_sup_ = std::max(lambda_sup_, lambda_H(x));
    }

    // In u = ln s, psi0(e^u) = s0 + int_{u0}^{u} e^v / (1 - Lambda(x(v))) dv with
    // x(v) = (H')^{-1}(e^{-v}). (The substitution y = 1/s turns dy / y^2 into ds.)
    double integrand(double u) const {
        return 1.0 / (1.0 - lambda_at_log(log_H_prime_inverse(-u)));
    }
    double psi_segment(double a, double b) const {
        if (b <= a) return 0.0;
        return integrate_gl([&](double v) { return std::exp(v) * integrand(v); }, a, b, 1);
    }
    std::size_t table_index(double u) const {
        if (u >= us_.back()) throw DomainError("argument beyond the tabulated range of psi0");
        if (u <= us_.front()) return 0;
        const auto it = std::upper_bound(us_.begin(), us_.end(), u);
        return static_cast<std::size_t>(it - us_.begin()) - 1;
    }

    void build_psi_table() {
        const double u0 = -log_Hp_r0_;
        const double du = std::log(10.0) / 8.0;
        const double umax = 690.0;  // e^690 is still a finite double
        us_.clear();
        psi_.clear();
        us_.push_back(u0);
        psi_.push_back(std::exp(u0));
        for (double u = u0; u + du <= umax;) {
            const double next = u + du;
            psi_.push_back(psi_.back() + psi_segment(u, next));
            us_.push_back(next);
            u = next;
        }
    }

    FeedbackLaw law_;
    double r0_requested_, r0_ = 0.5, r2_ = 0.25;
    int halvings_ = 0;
    bool exponential_ = false;
    double log_Hp_r0_ = 0.0, lambda_sup_ = 0.0;
    std::vector<double> xs_, us_, psi_;
};

inline DecayModel build_decay_model(const FeedbackLaw& law, double r0 = 0.5) { return DecayModel(law, r0); }

// ---------------------------------------------------------------- envelopes on a grid

struct EnvelopePrediction {
    std::vector<double> t;
    std::vector<std::optional<double>> envelope;    // 2 gamma L(1/psi0^{-1}(t/M))
    std::vector<std::optional<double>> simplified;  // 2 gamma (H')^{-1}(kappa M/t), when limsup Lambda < 1
    double gamma = 0, M = 0, kappa = 1;
    double t_start = 0;
    bool simplified_applies = false;
};

inline EnvelopePrediction predict_envelope(const DecayModel& m, double E0, double gamma, double M,
                                           const std::vector<double>& t_grid, double kappa = 1.0) {
    if (!(M > 0.0)) throw DomainError("M must be positive");
    if (!(gamma > m.gamma_threshold(E0)))
        throw DomainError("gamma must exceed E(0) / (2 L(H'(r0^2))) = " + std::to_string(m.gamma_threshold(E0)));
    EnvelopePrediction p;
    p.t = t_grid;
    p.gamma = gamma;
    p.M = M;
    p.kappa = kappa;
    p.t_start = m.envelope_start(M);
    p.simplified_applies = m.lambda_near_zero() < 1.0;
    for (double t : t_grid) {
        auto le = m.log_envelope(t, gamma, M);
        p.envelope.push_back(le ? std::optional<double>(std::exp(*le)) : std::nullopt);
        std::optional<double> s;
        if (p.simplified_applies)
            if (auto ls = m.log_simplified_envelope(t, gamma, M, kappa)) s = std::exp(*ls);
        p.simplified.push_back(s);
    }
    return p;
}

// ---------------------------------------------------------------- fitting traces

enum class RateFamily { Exponential, Power };

struct FitWindow {
    std::optional<double> t_begin;  // default: 0 (exponential), T/10 (power)
    double floor_rel = 1e-24;       // samples below floor_rel * E(0) are roundoff and skipped
    double min_drop = 1e3;          // required E(0) / E(T)
};

struct DecayFit {
    RateFamily family = RateFamily::Power;
    double exponent = 0;   // d ln E / dt, or d ln E / d ln t
    double intercept = 0;
    double r_squared = 0;
    double slope_stderr = 0;
    double t_begin = 0, t_end = 0;
    std::size_t samples = 0;
    double energy_drop = 0;
};

namespace detail {
struct LineFit { double slope, intercept, r2, stderr_slope; };

inline LineFit least_squares(const std::vector<double>& X, const std::vector<double>& Y) {
    const double n = static_cast<double>(X.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < X.size(); ++i) mx += X[i], my += Y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit window has no spread in the abscissa");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    const double resid = std::max(0.0, syy - f.slope * sxy);
    f.stderr_slope = X.size() > 2 ? std::sqrt(resid / (n - 2.0) / sxx) : 0.0;
    return f;
}
} // namespace detail

inline DecayFit fit_decay_rate(const EnergyTrace& tr, RateFamily family, const FitWindow& w = {}) {
    if (tr.size() < 3) throw DomainError("trace too short to fit");
    const double E0 = tr.energy.front();
    if (!(E0 > 0.0)) throw DomainError("zero-energy trace has no decay rate");
    const double T = tr.times.back();
    const double floor = w.floor_rel * E0;
    double Emin = E0;
    for (double e : tr.energy) Emin = std::min(Emin, std::max(e, floor));
    const double drop = E0 / std::max(Emin, std::numeric_limits<double>::min());
    if (drop < w.min_drop)
        throw DomainError("trace too short: energy dropped by " + std::to_string(drop) + ", need " +
                          std::to_string(w.min_drop));
    const double t0 = w.t_begin.value_or(family == RateFamily::Power ? 0.1 * T : 0.0);
    std::vector<double> X, Y;
    double t_last = t0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k], e = tr.energy[k];
        if (t < t0) continue;
        if (!(e > floor)) break;
        if (family == RateFamily::Power && !(t > 0.0)) continue;
        X.push_back(family == RateFamily::Power ? std::log(t) : t);
        Y.push_back(std::log(e));
        t_last = t;
    }
    if (X.size() < 3) throw DomainError("trace too short: fewer than 3 samples in the fit window");
    const auto lf = detail::least_squares(X, Y);
    DecayFit f;
    f.family = family;
    f.exponent = lf.slope;
    f.intercept = lf.intercept;
    f.r_squared = lf.r2;
    f.slope_stderr = lf.stderr_slope;
    f.t_begin = t0;
    f.t_end = t_last;
    f.samples = X.size();
    f.energy_drop = drop;
    return f;
}

// ---------------------------------------------------------------- integral inequality

struct IntegralInequalityReport {
    double gamma = 0;
    double gamma_threshold = 0;  // E(0) / (2 L(H'(r0^2)))
    double M = 0;                // smallest M with int_S^T w E <= M E(S) at every sample S
    double worst_S = 0;
    std::size_t samples = 0;
    bool finite = true;
};

/// Weight w = L^{-1}(E / 2 gamma), or w = 1 in the exponential regime.
inline IntegralInequalityReport verify_integral_inequality(const EnergyTrace& tr, const DecayModel& m,
                                                           std::optional<double> gamma = std::nullopt) {
    IntegralInequalityReport r;
    r.samples = tr.size();
    if (tr.size() == 0) return r;
    const double E0 = tr.energy.front();
    if (!m.exponential_regime()) {
        r.gamma_threshold = E0 > 0.0 ? m.gamma_threshold(E0) : 0.0;
        r.gamma = gamma.value_or(1.01 * r.gamma_threshold);
        if (E0 > 0.0 && !(r.gamma > r.gamma_threshold))
            throw DomainError("gamma must exceed E(0) / (2 L(H'(r0^2)))");
    }
    std::vector<double> f(tr.size(), 0.0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double e = tr.energy[k];
        if (e <= 0.0) continue;
        const double wk = m.exponential_regime() ? 1.0 : m.L_inverse(e / (2.0 * r.gamma));
        f[k] = wk * e;
    }
    // tail integrals from each sample to the end
    double tail = 0.0;
    for (std::size_t k = tr.size(); k-- > 0;) {
        if (k + 1 < tr.size()) tail += 0.5 * (tr.times[k + 1] - tr.times[k]) * (f[k] + f[k + 1]);
        const double e = tr.energy[k];
        if (e > 0.0) {
            const double q = tail / e;
            if (q > r.M) r.M = q, r.worst_S = tr.times[k];
        } else if (tail > 0.0) {
            r.finite = false;
        }
    }
    r.finite = r.finite && std::isfinite(r.M);
    return r;
}

struct EnvelopeCheck {
    double gamma = 0, M = 0, t_start = 0;
    std::size_t checked = 0, violations = 0;
    double worst_ratio = 0;  // max E_sim / E_pred over checked samples
    bool passed() const { return violations == 0; }
};

inline EnvelopeCheck check_envelope(const EnergyTrace& tr, const DecayModel& m, double gamma, double M) {
    EnvelopeCheck c;
    c.gamma = gamma;
    c.M = M;
    c.t_start = m.envelope_start(M);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k], e = tr.energy[k];
        if (t < c.t_start || t / M > 1e290) continue;
        const auto le = m.log_envelope(t, gamma, M);
        if (!le) continue;
        ++c.checked;
        const double ratio = e > 0.0 ? std::exp(std::log(e) - *le) : 0.0;
        c.worst_ratio = std::max(c.worst_ratio, ratio);
        if (ratio > 1.0) ++c.violations;
    }
    return c;
}

/// Smallest kappa with E(t) <= 2 gamma (H')^{-1}(kappa M / t) on [t_from, T].
inline double calibrate_kappa(const EnergyTrace& tr, const DecayModel& m, double gamma, double M, double t_from) {
    double kappa = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k], e = tr.energy[k];
        if (t < t_from || !(e > 0.0) || t <= 0.0) continue;
        const double x = std::min(e / (2.0 * gamma), m.r0() * m.r0());
        kappa = std::max(kappa, t * std::exp(m.log_H_prime(x)) / M);
    }
    return kappa;
}

// ---------------------------------------------------------------- closed-form rate laws

// Each law is checked in coordinates where it is a straight line: ln E against
//   ln t                  for t^{-2/(p-1)}
//   ln t, after adding (2q/(p-1)) ln ln t    for t^{-2/(p-1)} ln^{-2q/(p-1)} t
//   ln ln t               for 1/ln t
//   (ln t)^{1/p}          for exp(-2 (ln t)^{1/p})
struct RateLaw {
    std::string law;         // human-readable
    std::string coordinate;  // abscissa of the straight-line fit
    double expected = 0;     // expected slope in that coordinate
};

inline RateLaw closed_form_rate(const FeedbackLaw& law) {
    return std::visit(
        [](const auto& k) -> RateLaw {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, LinearFeedback>)
                return {"exp(-c t)", "t", std::numeric_limits<double>::quiet_NaN()};
            else if constexpr (std::is_same_v<K, PolynomialFeedback>) {
                if (k.p == 1.0) return {"exp(-c t)", "t", std::numeric_limits<double>::quiet_NaN()};
                return {"t^(-2/(p-1))", "ln t", -2.0 / (k.p - 1.0)};
            } else if constexpr (std::is_same_v<K, PolyLogFeedback>)
                return {"t^(-2/(p-1)) ln^(-2q/(p-1)) t", "ln t", -2.0 / (k.p - 1.0)};
            else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>)
                return {"1/ln t", "ln ln t", -1.0};
            else
                return {"exp(-2 (ln t)^(1/p))", "(ln t)^(1/p)", -2.0};
        },
        law.kind());
}

struct RateTableRow {
    std::string feedback;
    RateLaw rate;
    double fitted = 0;
    double rel_error = 0;
    double r0 = 0;
    double lambda_sup = 0;
    double t_lo = 0, t_hi = 0;
    std::optional<double> simulated;  // fitted slope from a simulation, when one was run
};

/// Fits ln of the predicted envelope (gamma = 1/2, M = 1) over t in [t_lo, t_hi]
/// in the law's straight-line coordinate.
inline RateTableRow fit_envelope_rate(const FeedbackLaw& law, double t_lo, double t_hi, std::size_t points = 200) {
    const auto m = build_decay_model(law);
    RateTableRow row;
    row.feedback = law.name();
    row.rate = closed_form_rate(law);
    row.r0 = m.r0();
    row.lambda_sup = m.lambda_sup();
    row.t_lo = t_lo;
    row.t_hi = t_hi;
    if (!(t_lo >= m.envelope_start(1.0))) throw DomainError("fit window starts before the envelope is defined");
    double shift = 0.0;  // log-log correction for the poly-log family
    if (auto pl = std::get_if<PolyLogFeedback>(&law.kind())) shift = 2.0 * pl->q / (pl->p - 1.0);
    double p_explog = 0.0;
    if (auto el = std::get_if<ExpLogPowerFeedback>(&law.kind())) p_explog = el->p;
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < points; ++i) {
        const double lt = std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * static_cast<double>(i) / (points - 1);
        const auto le = m.log_envelope(std::exp(lt), 0.5, 1.0);
        if (!le) continue;
        double x = lt, y = *le;
        if (std::holds_alternative<PolyLogFeedback>(law.kind())) y += shift * std::log(lt);
        else if (std::holds_alternative<ExpInvSquareFeedback>(law.kind())) x = std::log(lt);
        else if (p_explog > 0.0) x = std::pow(lt, 1.0 / p_explog);
        X.push_back(x);
        Y.push_back(y);
    }
    row.fitted = detail::least_squares(X, Y).slope;
    row.rel_error = std::abs(row.fitted / row.rate.expected - 1.0);
    return row;
}

/// The four families of rate laws with fit windows far enough out that the
/// lower-order corrections are small.
inline std::vector<RateTableRow> decay_rate_table() {
    return {
        fit_envelope_rate(FeedbackLaw::parse("poly:3"), 1e10, 1e40),
        fit_envelope_rate(FeedbackLaw::parse("polylog:3,1"), 1e10, 1e40),
        fit_envelope_rate(FeedbackLaw::parse("expinvsq"), 1e40, 1e250),
        fit_envelope_rate(FeedbackLaw::parse("explog:3"), 1e40, 1e250),
    };
}

} // namespace degenwave
