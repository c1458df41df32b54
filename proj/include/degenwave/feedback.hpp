#pragma once

// Monotone boundary feedbacks rho with their growth envelope g near 0.
// On |s| <= 1, rho(s) = sign(s) g(|s|) (times c for the linear law); beyond,
// rho continues with slope 1 so that c1|s| <= |rho(s)| <= c2|s| for |s| >= 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include "errors.hpp"

namespace degenwave {

struct LinearFeedback { double c = 1.0; };
struct PolynomialFeedback { double p; };
struct PolyLogFeedback { double p; double q; };
struct ExpInvSquareFeedback {};
struct ExpLogPowerFeedback { double p; };

using FeedbackKind = std::variant<LinearFeedback, PolynomialFeedback, PolyLogFeedback, ExpInvSquareFeedback,
                                  ExpLogPowerFeedback>;

class FeedbackLaw {
public:
    explicit FeedbackLaw(FeedbackKind kind) : kind_(kind) {
        if (auto l = std::get_if<LinearFeedback>(&kind_); l && !(l->c > 0))
            throw DomainError("linear feedback needs c > 0");
        if (auto p = std::get_if<PolynomialFeedback>(&kind_); p && !(p->p >= 1))
            throw DomainError("polynomial feedback needs p >= 1");
        if (auto p = std::get_if<PolyLogFeedback>(&kind_); p && !(p->p > 1 && p->q > 0 && p->q < p->p))
            throw DomainError("poly-log feedback needs p > 1 and 0 < q < p");
        if (auto p = std::get_if<ExpLogPowerFeedback>(&kind_); p && !(p->p > 1))
            throw DomainError("exp-log-power feedback needs p > 1");
        compute_sector_constants();
    }

    static FeedbackLaw linear(double c = 1.0) { return FeedbackLaw(LinearFeedback{c}); }
    static FeedbackLaw polynomial(double p) { return FeedbackLaw(PolynomialFeedback{p}); }

    /// Parses "linear", "linear:c", "poly:p", "polylog:p,q", "expinvsq", "explog:p".
    static FeedbackLaw parse(const std::string& spec) {
        auto colon = spec.find(':');
        std::string name = spec.substr(0, colon);
        std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
        auto num = [&](std::size_t idx) {
            std::istringstream is(args);
            std::string tok;
            for (std::size_t i = 0; i <= idx; ++i)
                if (!std::getline(is, tok, ',')) throw DomainError("feedback '" + spec + "' is missing a parameter");
            return std::stod(tok);
        };
        if (name == "linear") return FeedbackLaw(LinearFeedback{args.empty() ? 1.0 : num(0)});
        if (name == "poly") return FeedbackLaw(PolynomialFeedback{num(0)});
        if (name == "polylog") return FeedbackLaw(PolyLogFeedback{num(0), num(1)});
        if (name == "expinvsq") return FeedbackLaw(ExpInvSquareFeedback{});
        if (name == "explog") return FeedbackLaw(ExpLogPowerFeedback{num(0)});
        throw DomainError("unknown feedback '" + spec + "'");
    }

    const FeedbackKind& kind() const { return kind_; }
    bool is_linear() const { return std::holds_alternative<LinearFeedback>(kind_); }

    std::string name() const {
        std::ostringstream os;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LinearFeedback>) os << "linear:" << k.c;
                else if constexpr (std::is_same_v<K, PolynomialFeedback>) os << "poly:" << k.p;
                else if constexpr (std::is_same_v<K, PolyLogFeedback>) os << "polylog:" << k.p << "," << k.q;
                else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>) os << "expinvsq";
                else os << "explog:" << k.p;
            },
            kind_);
        return os.str();
    }

    /// Growth envelope g on [0, 1] (odd extension for negative s).
    double g(double s) const {
        if (s < 0) return -g(-s);
        if (s == 0) return 0.0;
        return std::visit(
            [s](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LinearFeedback>) return s;
                else if constexpr (std::is_same_v<K, PolynomialFeedback>) return std::pow(s, k.p);
                else if constexpr (std::is_same_v<K, PolyLogFeedback>)
                    return std::pow(s, k.p) * std::pow(std::log(std::exp(1.0) / s), k.q);
                else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>) return std::exp(-1.0 / (s * s));
                else return std::exp(-std::pow(std::log(1.0 / s), k.p));
            },
            kind_);
    }

    double g_prime(double s) const {
        s = std::abs(s);
        return std::visit(
            [s](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LinearFeedback>) return 1.0;
                else if constexpr (std::is_same_v<K, PolynomialFeedback>) {
                    if (s == 0) return k.p == 1 ? 1.0 : 0.0;
                    return k.p * std::pow(s, k.p - 1);
                } else if constexpr (std::is_same_v<K, PolyLogFeedback>) {
                    if (s == 0) return 0.0;
                    const double l = std::log(std::exp(1.0) / s);
                    return std::pow(s, k.p - 1) * std::pow(l, k.q - 1) * (k.p * l - k.q);
                } else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>) {
                    if (s == 0) return 0.0;
                    return 2.0 / (s * s * s) * std::exp(-1.0 / (s * s));
                } else {
                    if (s == 0) return 0.0;
                    const double l = std::log(1.0 / s);
                    if (l <= 0) return 0.0;  // p > 1: the slope vanishes at s = 1
                    return std::exp(-std::pow(l, k.p)) * k.p * std::pow(l, k.p - 1) / s;
                }
            },
            kind_);
    }

    /// ln g(s) as a function of ls = ln s <= 0; finite where g itself underflows.
    double log_g_at_log(double ls) const {
        return std::visit(
            [ls](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LinearFeedback>) return ls;
                else if constexpr (std::is_same_v<K, PolynomialFeedback>) return k.p * ls;
                else if constexpr (std::is_same_v<K, PolyLogFeedback>) return k.p * ls + k.q * std::log(1.0 - ls);
                else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>) return -std::exp(-2.0 * ls);
                else return -std::pow(std::max(0.0, -ls), k.p);
            },
            kind_);
    }

    /// Elasticity s g'(s) / g(s) as a function of ls = ln s.
    double elasticity_at_log(double ls) const {
        return std::visit(
            [ls](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LinearFeedback>) return 1.0;
                else if constexpr (std::is_same_v<K, PolynomialFeedback>) return k.p;
                else if constexpr (std::is_same_v<K, PolyLogFeedback>) return k.p - k.q / (1.0 - ls);
                else if constexpr (std::is_same_v<K, ExpInvSquareFeedback>) return 2.0 * std::exp(-2.0 * ls);
                else return k.p * std::pow(std::max(0.0, -ls), k.p - 1.0);
            },
            kind_);
    }

    double log_g(double s) const {
        if (!(s > 0.0)) throw DomainError("log_g needs s > 0");
        return log_g_at_log(std::log(s));
    }
    double elasticity(double s) const {
        if (!(s > 0.0)) throw DomainError("elasticity needs s > 0");
        return elasticity_at_log(std::log(s));
    }

    /// g^{-1} on [0, g(1)] by bisection (closed form for polynomial and linear laws).
    double g_inverse(double y) const {
        if (y < 0) return -g_inverse(-y);
        if (is_linear()) return y;
        if (auto p = std::get_if<PolynomialFeedback>(&kind_)) return std::pow(y, 1.0 / p->p);
        double lo = 0.0, hi = 1.0;
        if (y >= g(1.0)) return 1.0;
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (g(mid) < y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    double rho(double s) const {
        if (auto l = std::get_if<LinearFeedback>(&kind_)) return l->c * s;
        const double m = std::abs(s);
        const double r = m <= 1.0 ? g(m) : g(1.0) + (m - 1.0);
        return s < 0 ? -r : r;
    }

    double rho_prime(double s) const {
        if (auto l = std::get_if<LinearFeedback>(&kind_)) return l->c;
        const double m = std::abs(s);
        return m <= 1.0 ? g_prime(m) : 1.0;
    }

    double c1() const { return c1_; }
    double c2() const { return c2_; }

private:
    void compute_sector_constants() {
        if (auto l = std::get_if<LinearFeedback>(&kind_)) {
            c1_ = c2_ = l->c;
            return;
        }
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int k = 1; k <= 400; ++k) {
            const double s = std::exp2(-30.0 * (1.0 - k / 400.0));  // (0, 1]
            const double r = rho(s), gs = g(s);
            if (gs > 0) lo = std::min(lo, r / gs);
            const double gi = g_inverse(std::min(s, g(1.0)));
            if (gi > 0) hi = std::max(hi, r / gi);
            const double big = 1.0 + 99.0 * (k - 1) / 399.0;  // [1, 100]
            lo = std::min(lo, rho(big) / big);
            hi = std::max(hi, rho(big) / big);
        }
        c1_ = lo;
        c2_ = hi;
    }

    FeedbackKind kind_;
    double c1_ = 1.0, c2_ = 1.0;
};

} // namespace degenwave
