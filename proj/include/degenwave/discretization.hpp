#pragma once

// Uniform grid and the flux-form degenerate operator (a u_x)_x.
//
// Node i carries the control volume [x_{i-1/2}, x_{i+1/2}] clipped to [0,1], so
// interior weights are h and the two end weights h/2. With F_{i+1/2} the
// midpoint flux a(x_{i+1/2}) (u_{i+1}-u_i)/h the operator is
//   (A u)_i = (F_{i+1/2} - F_{i-1/2}) / w_i,
// which is symmetric for the trapezoid inner product sum_i w_i u_i v_i.
// a(0) is never touched: the first flux uses a(h/2).

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "feedback.hpp"
#include "weights.hpp"

namespace degenwave {

struct Dirichlet {};
struct LinearDamped { double beta; };
struct NonlinearDamped { double beta; FeedbackLaw law; };

using BoundaryCondition = std::variant<Dirichlet, LinearDamped, NonlinearDamped>;

inline double damping_beta(const BoundaryCondition& bc) {
    if (auto l = std::get_if<LinearDamped>(&bc)) return l->beta;
    if (auto nl = std::get_if<NonlinearDamped>(&bc)) return nl->beta;
    return 0.0;
}

inline bool is_dirichlet(const BoundaryCondition& bc) { return std::holds_alternative<Dirichlet>(bc); }

class Grid {
public:
    Grid(Weight w, std::size_t n) : weight_(std::move(w)), n_(n) {
        if (n < 3) throw DomainError("grid needs at least 3 cells");
        h_ = 1.0 / static_cast<double>(n);
        x_.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) x_[i] = static_cast<double>(i) * h_;
        a_mid_.resize(n);
        for (std::size_t i = 0; i < n; ++i) a_mid_[i] = weight_.a((static_cast<double>(i) + 0.5) * h_);
        w_.assign(n + 1, h_);
        w_.front() = w_.back() = 0.5 * h_;
        a1_ = weight_.a_at_1();
        // nonadmissible weights (theta >= 2) run in the strong regime
        regime_ = weight_.admissible() ? weight_.regime() : Regime::Strong;
    }

    std::size_t n() const { return n_; }
    std::size_t size() const { return n_ + 1; }
    double h() const { return h_; }
    double x(std::size_t i) const { return x_[i]; }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& a_mid() const { return a_mid_; }
    const std::vector<double>& weights() const { return w_; }
    double a1() const { return a1_; }
    Regime regime() const { return regime_; }
    const Weight& weight() const { return weight_; }

    /// First node that is a genuine unknown (node 0 is pinned in the weak regime).
    std::size_t first_active() const { return regime_ == Regime::Weak ? 1 : 0; }

private:
    Weight weight_;
    std::size_t n_;
    double h_, a1_;
    Regime regime_;
    std::vector<double> x_, a_mid_, w_;
};

struct GridState {
    double t = 0.0;
    std::vector<double> u, v;
    Regime regime = Regime::Weak;
    BoundaryCondition bc = Dirichlet{};
};

inline void check_size(const Grid& g, std::span<const double> u) {
    if (u.size() != g.size())
        throw DomainError("grid function has " + std::to_string(u.size()) + " values, grid expects " +
                          std::to_string(g.size()));
}

/// Zeroes the pinned nodes: u_0 in the weak regime, u_n under a Dirichlet right end.
inline void project_admissible(const Grid& g, std::span<double> u, bool dirichlet_right = true) {
    if (g.regime() == Regime::Weak) u.front() = 0.0;
    if (dirichlet_right) u.back() = 0.0;
}

/// (A u) with the right-end flux a(1) u_x(1) supplied (natural boundary row at x = 1).
inline std::vector<double> apply_operator(const Grid& g, std::span<const double> u, double right_flux) {
    check_size(g, u);
    const std::size_t n = g.n();
    const double h = g.h();
    const auto& am = g.a_mid();
    std::vector<double> out(n + 1, 0.0);
    auto F = [&](std::size_t i) { return am[i] * (u[i + 1] - u[i]) / h; };
    for (std::size_t i = 1; i < n; ++i) out[i] = (F(i) - F(i - 1)) / h;
    out[0] = g.regime() == Regime::Weak ? 0.0 : 2.0 * F(0) / h;
    out[n] = 2.0 * (right_flux - F(n - 1)) / h;
    return out;
}

/// (A u) on the admissible subspace: Dirichlet at x = 1 (row n is zero).
inline std::vector<double> apply_operator(const Grid& g, std::span<const double> u) {
    auto out = apply_operator(g, u, 0.0);
    out.back() = 0.0;
    return out;
}

/// Trapezoid inner product.
inline double inner(const Grid& g, std::span<const double> u, std::span<const double> w) {
    const auto& wt = g.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < wt.size(); ++i) s += wt[i] * u[i] * w[i];
    return s;
}

inline double l2_norm_sq(const Grid& g, std::span<const double> u) { return inner(g, u, u); }

/// sum a_mid ((u_{i+1}-u_i)/h)^2 h
inline double stiffness_sq(const Grid& g, std::span<const double> u) {
    const auto& am = g.a_mid();
    const double h = g.h();
    double s = 0.0;
    for (std::size_t i = 0; i < am.size(); ++i) {
        const double d = (u[i + 1] - u[i]) / h;
        s += am[i] * d * d * h;
    }
    return s;
}

inline double discrete_energy(const Grid& g, const GridState& s) {
    check_size(g, s.u);
    check_size(g, s.v);
    double e = 0.5 * l2_norm_sq(g, s.v) + 0.5 * stiffness_sq(g, s.u);
    if (!is_dirichlet(s.bc)) e += 0.5 * damping_beta(s.bc) * g.a1() * s.u.back() * s.u.back();
    return e;
}

/// u_x(t, 1). One-sided second-order difference under Dirichlet; exact boundary
/// law for the damped conditions.
inline double boundary_flux(const Grid& g, const GridState& s) {
    check_size(g, s.u);
    const std::size_t n = g.n();
    const double ub = s.u[n], vb = s.v[n];
    return std::visit(
        [&](const auto& bc) -> double {
            using B = std::decay_t<decltype(bc)>;
            if constexpr (std::is_same_v<B, Dirichlet>)
                return (3.0 * s.u[n] - 4.0 * s.u[n - 1] + s.u[n - 2]) / (2.0 * g.h());
            else if constexpr (std::is_same_v<B, LinearDamped>) return -vb - bc.beta * ub;
            else return -bc.law.rho(vb) - bc.beta * ub;
        },
        s.bc);
}

/// Tridiagonal system with sub-diagonal l, diagonal d, super-diagonal up.
/// Factorization is kept so that repeated solves cost one sweep each.
class Tridiagonal {
public:
    Tridiagonal() = default;
    Tridiagonal(std::vector<double> l, std::vector<double> d, std::vector<double> up)
        : l_(std::move(l)), d_(std::move(d)), up_(std::move(up)) {
        const std::size_t m = d_.size();
        if (l_.size() != m || up_.size() != m) throw DomainError("tridiagonal bands must have equal length");
        dp_.resize(m);
        mult_.assign(m, 0.0);
        dp_[0] = d_[0];
        for (std::size_t i = 1; i < m; ++i) {
            if (dp_[i - 1] == 0.0 || !std::isfinite(dp_[i - 1])) throw NumericalError("singular tridiagonal pivot");
            mult_[i] = l_[i] / dp_[i - 1];
            dp_[i] = d_[i] - mult_[i] * up_[i - 1];
        }
        if (dp_[m - 1] == 0.0 || !std::isfinite(dp_[m - 1])) throw NumericalError("singular tridiagonal pivot");
    }

    std::size_t size() const { return d_.size(); }

    /// Forward elimination in place; afterwards row m-1 reads pivot(m-1) * x_{m-1} = r_{m-1}.
    void forward(std::span<double> r) const {
        for (std::size_t i = 1; i < r.size(); ++i) r[i] -= mult_[i] * r[i - 1];
    }
    /// Back substitution given the last unknown.
    void backward(std::span<double> r, double last) const {
        const std::size_t m = r.size();
        r[m - 1] = last;
        for (std::size_t i = m - 1; i-- > 0;) r[i] = (r[i] - up_[i] * r[i + 1]) / dp_[i];
    }
    void solve(std::span<double> r) const {
        forward(r);
        backward(r, r[r.size() - 1] / dp_.back());
    }
    double pivot(std::size_t i) const { return dp_[i]; }

private:
    std::vector<double> l_, d_, up_, dp_, mult_;
};

/// Matrix of -A on the active nodes of the Dirichlet problem, scaled by the
/// node weights so that it is the symmetric stiffness matrix K.
inline Tridiagonal stiffness_matrix(const Grid& g) {
    const std::size_t lo = g.first_active(), hi = g.n() - 1, m = hi - lo + 1;
    const auto& am = g.a_mid();
    const double h = g.h();
    std::vector<double> l(m, 0.0), d(m, 0.0), up(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = lo + k;
        const double left = i > 0 ? am[i - 1] / h : 0.0, right = am[i] / h;
        d[k] = left + right;
        if (k > 0) l[k] = -left;
        if (k + 1 < m) up[k] = -right;
    }
    return Tridiagonal(std::move(l), std::move(d), std::move(up));
}

/// Solves -(a p')' = f with p(1) = 0 and the regime condition at 0, i.e. K p = M f.
inline std::vector<double> solve_elliptic(const Grid& g, std::span<const double> f) {
    check_size(g, f);
    const auto K = stiffness_matrix(g);
    const std::size_t lo = g.first_active(), hi = g.n() - 1;
    std::vector<double> r(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) r[i - lo] = g.weights()[i] * f[i];
    K.solve(r);
    std::vector<double> p(g.size(), 0.0);
    for (std::size_t i = lo; i <= hi; ++i) p[i] = r[i - lo];
    return p;
}

/// Dual norm ||f||^2_{-1} = <f, (-A)^{-1} f> of the Dirichlet operator.
inline double dual_norm_sq(const Grid& g, std::span<const double> f) {
    const auto p = solve_elliptic(g, f);
    double s = 0.0;
    for (std::size_t i = g.first_active(); i < g.n(); ++i) s += g.weights()[i] * f[i] * p[i];
    return s;
}

} // namespace degenwave
