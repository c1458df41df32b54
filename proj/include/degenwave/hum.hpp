#pragma once

// Exact boundary controllability at x = 1 by the Hilbert Uniqueness Method,
// posed directly on the discrete scheme.
//
// States X = (u, v) on the active nodes carry the energy inner product
// <X, Y>_E = K-product of u's + M-product of v's, for which the midpoint step S
// is orthogonal (so S* = S^{-1}, the same scheme run with -dt). A controlled
// step with Dirichlet data of mean b over the step reads X' = S X + b G.
// The map J (y, y_t) -> ((-A)^{-1} y_t, -y) commutes with S and turns the
// transposition pairing int y_t w - int y w_t into <J X, W>_E; |J X|_E is the
// L^2 x H^{-1} norm of the controlled state.
//
// With g = J G and o_k(W) = <g, S^{-(K-1-k)} W>_E, the control b_k = o_k(W)/dt
// gives J X^K = S^K J X^0 + Lambda W, Lambda W = sum_k (o_k/dt) S^{K-1-k} g.
// Lambda is symmetric positive semidefinite, <Lambda W, W>_E = dt sum (o_k/dt)^2,
// and o_k/dt approximates -a(1) w_x(t_{k+1/2}, 1) for the adjoint w with final
// datum W. Conjugate gradients on Lambda W = -S^K J X^0 give the HUM control.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "discretization.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "weights.hpp"

namespace degenwave {

struct HumProblem {
    Weight weight = Weight::power(0.0);
    double T = 2.5;
    std::size_t grid_n = 200;
    std::optional<double> dt;  // defaults to h/2
    InitialData initial = FunctionData{[](double x) { return std::sin(std::numbers::pi * x); }, {}};
    double tol = 1e-8;
    std::size_t max_iter = 500;
    bool require_observable_time = true;  // reject T <= T_a
};

struct HumSolution {
    std::vector<double> times;     // step midpoints t_{k+1/2}
    std::vector<double> control;   // boundary value y(t,1) over each step
    std::vector<double> cg_residuals;   // relative residual per iteration (index 0: initial)
    std::vector<double> cg_functional;  // quadratic functional 1/2<Lambda W,W> - <b,W>, nonincreasing
    std::size_t iterations = 0;
    bool converged = false;
    double initial_norm = 0;       // |(y0, y1)| in L^2 x H^{-1}
    double final_state_norm = 0;   // |(y, y_t)(T)| in L^2 x H^{-1}, from an independent forward solve
    double smallest_ritz = 0, largest_ritz = 0;
    double control_l2 = 0;         // (int_0^T f^2)^{1/2}
    GridState optimal_datum;       // W
    double dt = 0;
};

namespace detail {

// Eigenvalue extremes of a symmetric tridiagonal matrix by Sturm bisection.
inline std::pair<double, double> tridiagonal_extreme_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
    const std::size_t m = d.size();
    if (m == 0) return {0.0, 0.0};
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < m ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    auto count_below = [&](double x) {
        std::size_t c = 0;
        double q = d[0] - x;
        if (q < 0) ++c;
        for (std::size_t i = 1; i < m; ++i) {
            if (q == 0.0) q = 1e-300;
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
            if (q < 0) ++c;
        }
        return c;
    };
    auto kth = [&](std::size_t k) {  // k-th smallest, 1-based
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            (count_below(mid) >= k ? b : a) = mid;
        }
        return 0.5 * (a + b);
    };
    return {kth(1), kth(m)};
}

} // namespace detail

/// The discrete Gram operator Lambda and the pieces of the control-to-state map.
class HumOperator {
public:
    HumOperator(const Grid& g, double T, double dt_nominal)
        : g_(&g),
          steps_(static_cast<std::size_t>(std::ceil(T / dt_nominal - 1e-9))),
          dt_(T / static_cast<double>(steps_)),
          fwd_(g, Dirichlet{}, dt_),
          bwd_(g, Dirichlet{}, -dt_) {
        GridState G = zero();
        fwd_.step_with_boundary_mean(G, 1.0);
        G.u.back() = G.v.back() = 0.0;
        ghat_ = apply_J(G);
    }

    const Grid& grid() const { return *g_; }
    std::size_t steps() const { return steps_; }
    double dt() const { return dt_; }

    GridState zero() const {
        GridState s;
        s.regime = g_->regime();
        s.u.assign(g_->size(), 0.0);
        s.v.assign(g_->size(), 0.0);
        return s;
    }

    double inner_E(const GridState& X, const GridState& Y) const {
        const auto& am = g_->a_mid();
        const double h = g_->h();
        double s = 0.0;
        for (std::size_t i = 0; i < am.size(); ++i) s += am[i] * (X.u[i + 1] - X.u[i]) * (Y.u[i + 1] - Y.u[i]) / h;
        return s + inner(*g_, X.v, Y.v);
    }

    /// J (y, y_t) = ((-A)^{-1} y_t, -y), Dirichlet at 1.
    GridState apply_J(const GridState& X) const {
        GridState Y = zero();
        Y.u = solve_elliptic(*g_, X.v);
        for (std::size_t i = 0; i < X.u.size(); ++i) Y.v[i] = -X.u[i];
        pin(Y);
        return Y;
    }

    /// S^K applied to X (homogeneous problem).
    GridState evolve(GridState X) const {
        for (std::size_t k = 0; k < steps_; ++k) fwd_.step(X);
        return X;
    }

    /// o_k(W) / dt for k = 0..K-1: the discrete boundary observation of the
    /// adjoint solution with final datum W, i.e. the HUM control.
    std::vector<double> observe(GridState W) const {
        std::vector<double> o(steps_);
        for (std::size_t j = 0; j < steps_; ++j) {
            const std::size_t k = steps_ - 1 - j;
            o[k] = inner_E(ghat_, W) / dt_;
            if (j + 1 < steps_) bwd_.step(W);
        }
        return o;
    }

    /// sum_k b_k S^{K-1-k} g: J applied to the final state reached from rest with boundary means b.
    GridState synthesize(const std::vector<double>& b) const {
        GridState Z = zero();
        for (std::size_t k = 0; k < steps_; ++k) {
            fwd_.step(Z);
            for (std::size_t i = 0; i < Z.u.size(); ++i) {
                Z.u[i] += b[k] * ghat_.u[i];
                Z.v[i] += b[k] * ghat_.v[i];
            }
        }
        return Z;
    }

    GridState gram_apply(const GridState& W) const { return synthesize(observe(W)); }

    /// Forward controlled solve (independent of Lambda): from X0 with boundary means b.
    GridState controlled_final_state(const GridState& X0, const std::vector<double>& b) const {
        GridState X = X0;
        for (std::size_t k = 0; k < steps_; ++k) fwd_.step_with_boundary_mean(X, b[k]);
        return X;
    }

    /// |(y, y_t)| in L^2 x H^{-1} over the active nodes (the boundary node carries the control).
    double state_norm(GridState X) const {
        X.u.back() = X.v.back() = 0.0;
        const GridState Y = apply_J(X);
        return std::sqrt(std::max(0.0, inner_E(Y, Y)));
    }

    void pin(GridState& X) const {
        project_admissible(*g_, X.u);
        project_admissible(*g_, X.v);
    }

private:
    const Grid* g_;
    std::size_t steps_;
    double dt_;
    MidpointStepper fwd_, bwd_;
    GridState ghat_;
};

inline void axpy(double a, const GridState& x, GridState& y) {
    for (std::size_t i = 0; i < y.u.size(); ++i) {
        y.u[i] += a * x.u[i];
        y.v[i] += a * x.v[i];
    }
}

inline HumSolution solve_hum(const HumProblem& p) {
    if (!p.weight.admissible()) throw DomainError("HUM needs an admissible weight");
    const auto consts = compute_constants(p.weight);
    if (p.require_observable_time && !(p.T > consts.T_a))
        throw DomainError("HUM needs T > T_a = " + std::to_string(consts.T_a));
    Grid g(p.weight, p.grid_n);
    const HumOperator op(g, p.T, p.dt.value_or(0.5 * g.h()));

    GridState X0 = make_initial_state(g, p.initial, Dirichlet{});
    HumSolution sol;
    sol.dt = op.dt();
    sol.initial_norm = op.state_norm(X0);
    sol.times.resize(op.steps());
    for (std::size_t k = 0; k < op.steps(); ++k) sol.times[k] = (k + 0.5) * op.dt();

    GridState b = op.evolve(op.apply_J(X0));
    for (std::size_t i = 0; i < b.u.size(); ++i) b.u[i] = -b.u[i], b.v[i] = -b.v[i];
    const double bnorm = std::sqrt(op.inner_E(b, b));

    GridState W = op.zero();
    sol.cg_residuals.push_back(bnorm > 0 ? 1.0 : 0.0);
    sol.cg_functional.push_back(0.0);
    if (bnorm == 0.0) {
        sol.converged = true;
        sol.control.assign(op.steps(), 0.0);
        sol.optimal_datum = W;
        return sol;
    }

    GridState r = b, d = b;
    double rr = op.inner_E(r, r);
    std::vector<double> alphas, betas;
    for (std::size_t it = 1; it <= p.max_iter; ++it) {
        const GridState Ad = op.gram_apply(d);
        const double dAd = op.inner_E(d, Ad);
        if (!(dAd > 0.0)) throw NumericalError("Gram operator is not positive on the search direction");
        const double alpha = rr / dAd;
        axpy(alpha, d, W);
        axpy(-alpha, Ad, r);
        const double rr_new = op.inner_E(r, r);
        const double beta = rr_new / rr;
        alphas.push_back(alpha);
        betas.push_back(beta);
        // functional 1/2 <Lambda W, W> - <b, W> = -1/2 <b + r, W> since Lambda W = b - r
        double fb = 0.0;
        {
            GridState s = b;
            axpy(1.0, r, s);
            fb = -0.5 * op.inner_E(s, W);
        }
        sol.cg_functional.push_back(fb);
        sol.cg_residuals.push_back(std::sqrt(rr_new) / bnorm);
        sol.iterations = it;
        rr = rr_new;
        if (sol.cg_residuals.back() <= p.tol) {
            sol.converged = true;
            break;
        }
        GridState dn = r;
        axpy(beta, d, dn);
        d = std::move(dn);
    }

    // Lanczos matrix of the CG run
    std::vector<double> td(alphas.size()), te(alphas.size() > 0 ? alphas.size() - 1 : 0);
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        td[j] = 1.0 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0.0);
        if (j + 1 < alphas.size()) te[j] = std::sqrt(betas[j]) / alphas[j];
    }
    std::tie(sol.smallest_ritz, sol.largest_ritz) = detail::tridiagonal_extreme_eigenvalues(td, te);

    sol.control = op.observe(W);
    double l2 = 0.0;
    for (double f : sol.control) l2 += op.dt() * f * f;
    sol.control_l2 = std::sqrt(l2);
    sol.final_state_norm = op.state_norm(op.controlled_final_state(X0, sol.control));
    sol.optimal_datum = std::move(W);
    return sol;
}

/// Relative residual of the transposition identity
///   [int y_t w - int y w_t]_0^T = -a(1) int_0^T f(t) w_x(t,1) dt
/// for the controlled run of `sol` and the adjoint w started from random smooth
/// data at t = 0. The right side uses the one-sided difference for w_x(t,1), so
/// the residual measures the discretization error of the scheme.
inline double verify_transposition_identity(const HumProblem& p, const HumSolution& sol, std::uint64_t seed = 11) {
    Grid g(p.weight, p.grid_n);
    const HumOperator op(g, p.T, p.dt.value_or(0.5 * g.h()));
    if (sol.control.size() != op.steps()) throw DomainError("control does not match the problem's time grid");
    const MidpointStepper fwd(g, Dirichlet{}, op.dt());

    GridState X = make_initial_state(g, p.initial, Dirichlet{});
    GridState w = make_initial_state(g, RandomSmoothData{seed, 6}, Dirichlet{});
    const double lhs0 = op.inner_E(op.apply_J(X), w);
    double rhs = 0.0, flux_prev = boundary_flux(g, w);
    for (std::size_t k = 0; k < op.steps(); ++k) {
        fwd.step_with_boundary_mean(X, sol.control[k]);
        fwd.step(w);
        const double flux = boundary_flux(g, w);
        rhs -= g.a1() * op.dt() * sol.control[k] * 0.5 * (flux_prev + flux);
        flux_prev = flux;
    }
    X.u.back() = X.v.back() = 0.0;
    const double lhs = op.inner_E(op.apply_J(X), w) - lhs0;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0 ? std::abs(lhs - rhs) / scale : 0.0;
}

struct OptimalityReport {
    double hum_norm = 0;
    double min_perturbed_norm = 0;  // smallest norm among admissible perturbed controls
    double max_final_state = 0;     // largest final-state norm among the perturbed controls
    bool hum_is_minimal = false;
};

/// Perturbs the HUM control by eps * delta with delta in the kernel of the
/// control-to-final-state map (random vectors with their Lambda-range part
/// removed, which costs one CG solve each) and compares L^2(0,T) norms.
inline OptimalityReport check_optimality(const HumProblem& p, const HumSolution& sol, std::size_t samples = 3,
                                         double eps = 0.2, std::uint64_t seed = 5) {
    Grid g(p.weight, p.grid_n);
    const HumOperator op(g, p.T, p.dt.value_or(0.5 * g.h()));
    const GridState X0 = make_initial_state(g, p.initial, Dirichlet{});
    std::mt19937_64 rng(seed);
    OptimalityReport rep;
    rep.hum_norm = sol.control_l2;
    rep.min_perturbed_norm = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> delta(op.steps());
        for (std::size_t k = 0; k < delta.size(); ++k) {
            const double t = sol.times[k] / p.T;
            delta[k] = std::sin(std::numbers::pi * (s + 1) * t) + 0.5 * detail::signed_unit(rng) * std::cos(3.0 * t);
        }
        // remove the range of the adjoint: delta <- delta - observe(Lambda^{-1} synthesize(delta))
        const GridState target = op.synthesize(delta);
        GridState Wd = op.zero(), r = target, d = target;
        double rr = op.inner_E(r, r);
        const double r0 = std::sqrt(rr);
        for (std::size_t it = 0; it < p.max_iter && std::sqrt(rr) > 1e-10 * r0; ++it) {
            const GridState Ad = op.gram_apply(d);
            const double alpha = rr / op.inner_E(d, Ad);
            axpy(alpha, d, Wd);
            axpy(-alpha, Ad, r);
            const double rr_new = op.inner_E(r, r);
            GridState dn = r;
            axpy(rr_new / rr, d, dn);
            d = std::move(dn);
            rr = rr_new;
        }
        const auto proj = op.observe(Wd);
        double dn2 = 0.0;
        for (std::size_t k = 0; k < delta.size(); ++k) {
            delta[k] -= proj[k];
            dn2 += op.dt() * delta[k] * delta[k];
        }
        const double scale = eps * sol.control_l2 / std::sqrt(std::max(dn2, 1e-300));
        std::vector<double> f = sol.control;
        double n2 = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            f[k] += scale * delta[k];
            n2 += op.dt() * f[k] * f[k];
        }
        rep.min_perturbed_norm = std::min(rep.min_perturbed_norm, std::sqrt(n2));
        rep.max_final_state = std::max(rep.max_final_state, op.state_norm(op.controlled_final_state(X0, f)));
    }
    rep.hum_is_minimal = rep.hum_norm <= rep.min_perturbed_norm;
    return rep;
}

} // namespace degenwave
