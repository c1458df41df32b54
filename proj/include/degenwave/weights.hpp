#pragma once

// Degenerate diffusion coefficients a(x) on [0,1] with a(0) = 0, and the
// closed-form constants (Poincare, trace, observability time, stabilization
// constant) that depend only on a(1), the degeneracy measure mu_a and beta.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace degenwave {

enum class Regime { Weak, Strong };

inline const char* to_string(Regime r) { return r == Regime::Weak ? "weak" : "strong"; }

/// a(x) = x^theta
struct PurePower {
    double theta;
};

/// a(x) = x^theta (1 + sin^2(alpha log x)), a(0) = 0
struct OscillatoryPower {
    double theta;
    double alpha;
};

/// Samples (x_i, a_i, a'_i) with x_0 = 0, a_0 = 0 and x strictly increasing to 1.
/// An empty `aprime` means slopes are computed from the table.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> a;
    std::vector<double> aprime;
};

using WeightKind = std::variant<PurePower, OscillatoryPower, Tabulated>;

namespace detail {

// Hermite-cubic table with a power-law first interval, so that x a'(x)/a(x)
// stays bounded as x -> 0 (a cubic through (0,0) would force the ratio to 1 or 2).
struct WeightTable {
    std::vector<double> x, a, d;
    double first_exponent = 1.0;

    std::size_t interval(double t) const {
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = static_cast<std::size_t>(it - x.begin());
        if (i == 0) return 0;
        return std::min(i - 1, x.size() - 2);
    }

    double value(double t) const {
        std::size_t i = interval(t);
        if (i == 0) return a[1] * std::pow(t / x[1], first_exponent);
        double h = x[i + 1] - x[i];
        double s = (t - x[i]) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return h00 * a[i] + h10 * h * d[i] + h01 * a[i + 1] + h11 * h * d[i + 1];
    }

    double derivative(double t) const {
        std::size_t i = interval(t);
        if (i == 0) {
            if (t == 0.0) {
                if (first_exponent > 1) return 0.0;
                if (first_exponent == 1) return a[1] / x[1];
                return std::numeric_limits<double>::infinity();
            }
            return first_exponent * value(t) / t;
        }
        double h = x[i + 1] - x[i];
        double s = (t - x[i]) / h;
        double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
        double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
        return (d00 * a[i] + d01 * a[i + 1]) / h + d10 * d[i] + d11 * d[i + 1];
    }
};

inline std::shared_ptr<const WeightTable> build_table(const Tabulated& t) {
    const auto n = t.x.size();
    if (n < 3 || t.a.size() != n) throw DomainError("tabulated weight needs >= 3 samples of (x, a)");
    if (!t.aprime.empty() && t.aprime.size() != n) throw DomainError("tabulated weight: aprime column has wrong length");
    if (t.x.front() != 0.0 || t.a.front() != 0.0) throw DomainError("tabulated weight must start at (0, 0)");
    if (std::abs(t.x.back() - 1.0) > 1e-12) throw DomainError("tabulated weight must end at x = 1");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(t.x[i] > t.x[i - 1])) throw DomainError("tabulated weight: x must be strictly increasing");
        if (!(t.a[i] > 0.0)) throw DomainError("tabulated weight: a must be positive on (0,1]");
    }

    auto tab = std::make_shared<WeightTable>();
    tab->x = t.x;
    tab->x.back() = 1.0;
    tab->a = t.a;
    tab->d.assign(n, 0.0);
    if (!t.aprime.empty()) {
        tab->d = t.aprime;
    } else {
        // centered differences on the table (one-sided at x = 1)
        for (std::size_t i = 1; i + 1 < n; ++i)
            tab->d[i] = (t.a[i + 1] - t.a[i - 1]) / (t.x[i + 1] - t.x[i - 1]);
        tab->d[n - 1] = (t.a[n - 1] - t.a[n - 2]) / (t.x[n - 1] - t.x[n - 2]);
        // Fritsch-Carlson limiting keeps the interpolant monotone where the data are
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double delta = (t.a[i + 1] - t.a[i]) / (t.x[i + 1] - t.x[i]);
            if (delta == 0.0) {
                tab->d[i] = tab->d[i + 1] = 0.0;
                continue;
            }
            double al = tab->d[i] / delta, be = tab->d[i + 1] / delta;
            if (al < 0) tab->d[i] = 0, al = 0;
            if (be < 0) tab->d[i + 1] = 0, be = 0;
            double r = al * al + be * be;
            if (r > 9.0) {
                double tau = 3.0 / std::sqrt(r);
                tab->d[i] = tau * al * delta;
                tab->d[i + 1] = tau * be * delta;
            }
        }
    }
    double m = t.x[1] * tab->d[1] / t.a[1];
    tab->first_exponent = std::clamp(m, 0.0, 4.0);
    return tab;
}

} // namespace detail

/// An admissible (or, through `nonadmissible`, a deliberately inadmissible)
/// degenerate coefficient. Cheap to copy; immutable.
class Weight {
public:
    /// Admissible constructor: rejects mu_a >= 2, a(0) != 0 and non-positive a on (0,1].
    static Weight make(const WeightKind& kind) {
        Weight w(kind);
        w.validate_shape();
        w.mu_ = w.compute_mu();
        if (!(w.mu_ < 2.0))
            throw DomainError("weight is not admissible: mu_a = " + std::to_string(w.mu_) + " >= 2");
        w.regime_ = w.mu_ < 1.0 ? Regime::Weak : Regime::Strong;
        return w;
    }

    /// Pure power x^theta with any theta >= 0, used by the non-observability experiments.
    static Weight nonadmissible(double theta) {
        if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("theta must be finite and >= 0");
        Weight w(PurePower{theta});
        w.mu_ = theta;
        w.regime_ = theta < 1.0 ? Regime::Weak : Regime::Strong;
        return w;
    }

    static Weight power(double theta) { return make(PurePower{theta}); }

    double a(double x) const {
        check_x(x);
        if (auto p = std::get_if<PurePower>(&kind_)) {
            if (p->theta == 0.0) return 1.0;
            return std::pow(x, p->theta);
        }
        if (auto o = std::get_if<OscillatoryPower>(&kind_)) {
            if (x == 0.0) return 0.0;
            double s = std::sin(o->alpha * std::log(x));
            return std::pow(x, o->theta) * (1.0 + s * s);
        }
        return table_->value(x);
    }

    double a_prime(double x) const {
        check_x(x);
        if (auto p = std::get_if<PurePower>(&kind_)) {
            double th = p->theta;
            if (th == 0.0) return 0.0;
            if (x == 0.0) {
                if (th > 1.0) return 0.0;
                if (th == 1.0) return 1.0;
                return std::numeric_limits<double>::infinity();
            }
            return th * std::pow(x, th - 1.0);
        }
        if (auto o = std::get_if<OscillatoryPower>(&kind_)) {
            if (x == 0.0) {
                if (o->theta > 1.0) return 0.0;
                if (o->theta < 1.0) return std::numeric_limits<double>::infinity();
                return std::numeric_limits<double>::quiet_NaN();
            }
            double phase = o->alpha * std::log(x);
            double s = std::sin(phase);
            return std::pow(x, o->theta - 1.0) *
                   (o->theta * (1.0 + s * s) + o->alpha * std::sin(2.0 * phase));
        }
        return table_->derivative(x);
    }

    double mu_a() const { return mu_; }
    double a_at_1() const { return a(1.0); }
    Regime regime() const { return regime_; }
    bool admissible() const { return mu_ < 2.0; }
    const WeightKind& kind() const { return kind_; }

    /// Exponent theta for power-type weights, nullopt for tables.
    std::optional<double> theta() const {
        if (auto p = std::get_if<PurePower>(&kind_)) return p->theta;
        if (auto o = std::get_if<OscillatoryPower>(&kind_)) return o->theta;
        return std::nullopt;
    }

    std::string describe() const {
        std::ostringstream os;
        if (auto p = std::get_if<PurePower>(&kind_))
            os << "power(theta=" << p->theta << ")";
        else if (auto o = std::get_if<OscillatoryPower>(&kind_))
            os << "oscillatory(theta=" << o->theta << ", alpha=" << o->alpha << ")";
        else
            os << "tabulated(" << table_->x.size() << " samples)";
        return os.str();
    }

    /// Geometric probe ladder x = 2^{-s}, s uniform in [0, 50], clustered at 0.
    static std::vector<double> probe_grid(std::size_t count = 100000) {
        std::vector<double> xs(count);
        for (std::size_t k = 0; k < count; ++k)
            xs[k] = std::exp2(-50.0 * static_cast<double>(k) / static_cast<double>(count - 1));
        return xs;
    }

private:
    explicit Weight(WeightKind kind) : kind_(std::move(kind)) {
        if (auto t = std::get_if<Tabulated>(&kind_)) table_ = detail::build_table(*t);
    }

    static void check_x(double x) {
        if (!(x >= 0.0 && x <= 1.0)) throw DomainError("weight evaluated outside [0,1]: x = " + std::to_string(x));
    }

    void validate_shape() const {
        if (auto p = std::get_if<PurePower>(&kind_)) {
            if (!(p->theta >= 0.0 && p->theta < 2.0))
                throw DomainError("power weight needs theta in [0,2), got " + std::to_string(p->theta));
            return;
        }
        if (auto o = std::get_if<OscillatoryPower>(&kind_)) {
            if (!(o->theta > 0.0 && o->alpha > 0.0 && o->theta + 2.0 * o->alpha < 2.0))
                throw DomainError("oscillatory weight needs theta, alpha > 0 and theta + 2 alpha < 2");
            return;
        }
        // tables are validated on construction; check positivity between samples as well
        for (double x : probe_grid(2000))
            if (!(a(x) > 0.0)) throw DomainError("tabulated weight is not positive on (0,1]");
    }

    double ratio(double x) const { return x * std::abs(a_prime(x)) / a(x); }

    double compute_mu() const {
        if (auto p = std::get_if<PurePower>(&kind_)) return p->theta;
        auto xs = probe_grid();
        std::size_t best = 0;
        double best_val = -1.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double r = ratio(xs[k]);
            if (!std::isfinite(r)) throw DomainError("weight: x a'/a is not finite at x = " + std::to_string(xs[k]));
            if (r > best_val) best_val = r, best = k;
        }
        // golden-section refinement between the neighbours of the best probe
        double lo = xs[std::min(best + 1, xs.size() - 1)], hi = xs[best > 0 ? best - 1 : 0];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = ratio(c), fd = ratio(d);
        for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
            if (fc > fd) {
                hi = d, d = c, fd = fc;
                c = hi - g * (hi - lo), fc = ratio(c);
            } else {
                lo = c, c = d, fc = fd;
                d = lo + g * (hi - lo), fd = ratio(d);
            }
        }
        return std::max({best_val, fc, fd});
    }

    WeightKind kind_;
    std::shared_ptr<const detail::WeightTable> table_;
    double mu_ = 0.0;
    Regime regime_ = Regime::Weak;
};

/// Constants derived in closed form from (a(1), mu_a, beta).
/// beta-dependent entries are absent when beta = 0.
struct WeightConstants {
    double C_a;        ///< Poincare constant on {u(1) = 0}
    double C_a_prime;  ///< Poincare constant on the damped space
    double T_a;        ///< sufficient observability time
    double trace_constant;  ///< max{2, 1/a(1)} in u(1)^2 <= c ||u||_{1,a}^2
    double eta_1;
    std::optional<double> alpha_a;
    std::optional<double> gamma_a;
    std::optional<double> eta_2;
    std::optional<double> C_a_doubleprime;
    std::optional<double> M_a_beta;
};

inline WeightConstants compute_constants(const Weight& w, double beta = 0.0) {
    if (!w.admissible()) throw DomainError("constants are only defined for admissible weights");
    if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
    const double mu = w.mu_a(), a1 = w.a_at_1();
    const double gap = 2.0 - mu;

    WeightConstants k{};
    k.C_a = std::min(4.0, 1.0 / gap) / a1;
    k.C_a_prime = std::min(4.0, 2.0 / gap) / a1;
    k.T_a = 4.0 / (gap * std::min(1.0, a1)) + 2.0 * mu * std::sqrt(k.C_a);
    k.trace_constant = std::max(2.0, 1.0 / a1);
    k.eta_1 = 1.0 + 1.5 * a1;
    if (beta > 0.0) {
        const double alpha = std::min(1.0 / k.C_a_prime, beta * a1 / 2.0);
        const double eta2 = beta * (1.0 + beta - mu) + 0.5 * std::pow(2.0 * beta - mu / 2.0, 2);
        const double cpp = 2.0 * std::max({1.0 + mu / 4.0, 1.0 / a1 + mu / 4.0 * k.C_a_prime, mu / (2.0 * beta * a1)});
        const double b3 = 1.0 + 1.0 / (beta * beta * beta);
        k.alpha_a = alpha;
        k.gamma_a = std::max(2.0 * beta * a1, 1.0 + 2.0 * beta / gap);
        k.eta_2 = eta2;
        k.C_a_doubleprime = cpp;
        k.M_a_beta = 2.0 / gap *
                     (2.0 * cpp + k.eta_1 / a1 + eta2 * eta2 * b3 / gap * (1.0 + 1.0 / (beta * alpha)) +
                      2.0 * eta2 / (beta * std::sqrt(alpha)));
    }
    return k;
}

/// Lower bracket of the observability inequality: (2 - mu) T - 4/min{1,a(1)} - 2 mu sqrt(C_a).
inline double observability_bracket(const Weight& w, double T) {
    const auto k = compute_constants(w);
    return (2.0 - w.mu_a()) * T - 4.0 / std::min(1.0, w.a_at_1()) - 2.0 * w.mu_a() * std::sqrt(k.C_a);
}

/// Constant of the direct inequality: 6T + 1/min{1, a(1)}.
inline double direct_bound(const Weight& w, double T) { return 6.0 * T + 1.0 / std::min(1.0, w.a_at_1()); }

/// Read a CSV table `x,a,aprime` (header optional; the aprime column may be omitted).
inline Tabulated read_weight_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open weight table " + path);
    Tabulated t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // header
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, a, ap;
        if (!(ls >> x >> a)) throw DomainError("malformed weight table row: " + line);
        t.x.push_back(x);
        t.a.push_back(a);
        if (ls >> ap) t.aprime.push_back(ap);
    }
    if (!t.aprime.empty() && t.aprime.size() != t.x.size())
        throw DomainError("weight table: aprime column present on some rows only");
    return t;
}

} // namespace degenwave
