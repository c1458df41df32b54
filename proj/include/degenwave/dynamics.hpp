#pragma once

// Time integration of u_tt = (a u_x)_x with the regime condition at x = 0 and a
// Dirichlet, linearly damped or nonlinearly damped condition at x = 1.
//
// The integrator is the implicit midpoint rule on (u, v = u_t). Writing
// vbar = (v^k + v^{k+1})/2 and ubar = u^k + (dt/2) vbar, each step solves
//   (I - dt^2/4 A) vbar = v^k + (dt/2) A u^k
// (plus the damping terms in the last row), then u^{k+1} = u^k + dt vbar and
// v^{k+1} = 2 vbar - v^k. The discrete energy is conserved exactly in the
// Dirichlet case and decreases by dt a(1) vbar_n rho(vbar_n) otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "discretization.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "weights.hpp"

namespace degenwave {

// ---------------------------------------------------------------- initial data

/// u(t,x) = sin(sqrt(lambda) t + phase) y_theta(x); phase 0 is u0 = 0, u1 = sqrt(lambda) y.
struct EigenData { double theta; double phase = 0.0; };
struct BumpData { double center = 0.5; double half_width = 0.1; };
struct RandomSmoothData { std::uint64_t seed = 1; int modes = 8; };
struct SamplesData { std::string path; };
struct FunctionData {
    std::function<double(double)> u0;
    std::function<double(double)> v0;
};

using InitialData = std::variant<EigenData, BumpData, RandomSmoothData, SamplesData, FunctionData>;

/// cos^4 bump on [center - half_width, center + half_width]; C^3 across the edges.
inline double bump(double x, double center, double half_width) {
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * s);
    return c * c * c * c;
}

namespace detail {

// Uniform on [-1, 1) from the raw 64-bit stream; independent of the standard
// library's distribution implementations, so runs reproduce across toolchains.
inline double signed_unit(std::mt19937_64& rng) {
    return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

inline std::vector<std::vector<double>> read_csv_columns(const std::string& path, std::size_t ncols) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open samples file '" + path + "'");
    std::vector<std::vector<double>> cols(ncols);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.size() < ncols) {
            if (cols[0].empty()) continue;  // header
            throw DomainError("samples file '" + path + "' has a short row");
        }
        for (std::size_t c = 0; c < ncols; ++c) cols[c].push_back(row[c]);
    }
    if (cols[0].size() < 2) throw DomainError("samples file '" + path + "' needs at least two rows");
    return cols;
}

inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1 - s) * ys[i] + s * ys[i + 1];
}

} // namespace detail

/// Samples initial data on the grid and pins the constrained nodes.
inline GridState make_initial_state(const Grid& g, const InitialData& data, const BoundaryCondition& bc = Dirichlet{}) {
    GridState s;
    s.regime = g.regime();
    s.bc = bc;
    s.u.assign(g.size(), 0.0);
    s.v.assign(g.size(), 0.0);
    const auto& x = g.nodes();
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, EigenData>) {
                // control-volume averages: near theta = 2 the eigenfunction piles up
                // within the first cell, and point samples would misplace that mass
                const EigenPair ep(d.theta);
                const double w = std::sqrt(ep.lambda()), h = g.h(), kap = ep.kappa();
                auto average = [&](double lo, double hi) {
                    // x = s^{1/kappa} spreads the boundary layer at 0 over the panel
                    const double slo = std::pow(lo, kap), shi = std::pow(hi, kap);
                    const double integral = integrate_gl(
                        [&](double sv) { return ep(std::min(1.0, std::pow(sv, 1.0 / kap))) * std::pow(sv, 1.0 / kap - 1.0) / kap; },
                        slo, shi, lo == 0.0 ? 32 : 2);
                    return integral / (hi - lo);
                };
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double lo = std::max(0.0, x[i] - 0.5 * h), hi = std::min(1.0, x[i] + 0.5 * h);
                    const double y = average(lo, hi);
                    s.u[i] = std::sin(d.phase) * y;
                    s.v[i] = w * std::cos(d.phase) * y;
                }
            } else if constexpr (std::is_same_v<D, BumpData>) {
                if (d.center - d.half_width <= 0.0 || d.center + d.half_width >= 1.0)
                    throw DomainError("bump support must lie inside (0,1)");
                for (std::size_t i = 0; i < x.size(); ++i) s.u[i] = bump(x[i], d.center, d.half_width);
            } else if constexpr (std::is_same_v<D, RandomSmoothData>) {
                if (d.modes < 1) throw DomainError("random data needs at least one mode");
                std::mt19937_64 rng(d.seed);
                const bool weak = g.regime() == Regime::Weak;
                for (int k = 1; k <= d.modes; ++k) {
                    const double cu = detail::signed_unit(rng) / (k * k * k);
                    const double cv = detail::signed_unit(rng) / (k * k * k);
                    // sin(k pi x) vanishes at both ends; cos((k-1/2) pi x) has zero slope at 0
                    const double freq = weak ? k * std::numbers::pi : (k - 0.5) * std::numbers::pi;
                    for (std::size_t i = 0; i < x.size(); ++i) {
                        const double phi = weak ? std::sin(freq * x[i]) : std::cos(freq * x[i]);
                        s.u[i] += cu * phi;
                        s.v[i] += cv * freq * phi;
                    }
                }
            } else if constexpr (std::is_same_v<D, SamplesData>) {
                auto cols = detail::read_csv_columns(d.path, 3);
                for (std::size_t i = 0; i < x.size(); ++i) {
                    s.u[i] = detail::interp_linear(cols[0], cols[1], x[i]);
                    s.v[i] = detail::interp_linear(cols[0], cols[2], x[i]);
                }
            } else {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    s.u[i] = d.u0 ? d.u0(x[i]) : 0.0;
                    s.v[i] = d.v0 ? d.v0(x[i]) : 0.0;
                }
            }
        },
        data);
    project_admissible(g, s.u, is_dirichlet(bc));
    project_admissible(g, s.v, is_dirichlet(bc));
    return s;
}

// ---------------------------------------------------------------- stepping

/// One implicit midpoint step, with the tridiagonal factorization computed once.
class MidpointStepper {
public:
    MidpointStepper(const Grid& g, BoundaryCondition bc, double dt) : g_(&g), bc_(std::move(bc)), dt_(dt) {
        if (!(dt != 0.0) || !std::isfinite(dt)) throw DomainError("time step must be finite and nonzero");
        if (!is_dirichlet(bc_) && dt < 0) throw DomainError("damped problems cannot be integrated backwards");
        const std::size_t n = g.n();
        const double h = g.h(), c = 0.5 * dt, c2 = c * c;
        const auto& am = g.a_mid();
        lo_ = g.first_active();
        hi_ = is_dirichlet(bc_) ? n - 1 : n;
        const std::size_t m = hi_ - lo_ + 1;
        std::vector<double> l(m, 0.0), d(m, 1.0), up(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = lo_ + k;
            double left = 0.0, right = 0.0;
            if (i == 0) {
                right = 2.0 * am[0] / (h * h);
            } else if (i == n) {
                left = 2.0 * am[n - 1] / (h * h);
            } else {
                left = am[i - 1] / (h * h);
                right = am[i] / (h * h);
            }
            d[k] += c2 * (left + right);
            if (k > 0) l[k] = -c2 * left;
            if (k + 1 < m) up[k] = -c2 * right;
        }
        if (!is_dirichlet(bc_)) {
            const double beta = damping_beta(bc_);
            d[m - 1] += c2 * 2.0 / h * g.a1() * beta;
            // linear damping is absorbed into the matrix; nonlinear stays in the scalar equation
            if (std::holds_alternative<LinearDamped>(bc_)) d[m - 1] += c * 2.0 / h * g.a1();
            kappa_ = c * 2.0 / h * g.a1();
        }
        sys_ = Tridiagonal(std::move(l), std::move(d), std::move(up));
        rhs_.resize(m);
    }

    double dt() const { return dt_; }
    const BoundaryCondition& bc() const { return bc_; }

    /// Advances s by dt. Under Dirichlet the boundary value s.u[n] is whatever
    /// it is on entry (zero for the homogeneous problem).
    void step(GridState& s) const { advance(s, std::nullopt); }

    /// Dirichlet step with boundary values b_now at t and b_next at t + dt at x = 1.
    /// The scheme only sees their mean; afterwards u_n = b_next and v_n is the
    /// difference quotient.
    void step_with_boundary(GridState& s, double b_now, double b_next) const {
        if (!is_dirichlet(bc_)) throw DomainError("boundary data only applies to the Dirichlet problem");
        advance(s, std::make_pair(b_now, b_next));
    }

    /// Same, given only the midpoint value of the boundary data over the step.
    void step_with_boundary_mean(GridState& s, double mean) const { step_with_boundary(s, mean, mean); }

    /// Last boundary midpoint velocity (vbar_n), useful for exact dissipation checks.
    double last_boundary_midpoint_velocity() const { return last_vbar_n_; }

private:
    void advance(GridState& s, std::optional<std::pair<double, double>> data) const {
        const Grid& g = *g_;
        const std::size_t n = g.n();
        const double c = 0.5 * dt_, h = g.h();
        const auto& am = g.a_mid();
        if (data) s.u[n] = 0.0;  // boundary data enters below through its mean
        const double right_flux = is_dirichlet(bc_) ? 0.0 : -g.a1() * damping_beta(bc_) * s.u[n];
        const auto Au = apply_operator(g, s.u, right_flux);
        for (std::size_t i = lo_; i <= hi_; ++i) rhs_[i - lo_] = s.v[i] + c * Au[i];
        double vbar_n = 0.0;
        if (data) {
            vbar_n = (data->second - data->first) / dt_;
            rhs_.back() += c * am[n - 1] / (h * h) * 0.5 * (data->first + data->second);
        }
        if (const auto* nl = std::get_if<NonlinearDamped>(&bc_)) {
            sys_.forward(rhs_);
            const double pivot = sys_.pivot(rhs_.size() - 1);
            const double last = solve_boundary_scalar(pivot, rhs_.back(), nl->law);
            sys_.backward(rhs_, last);
        } else {
            sys_.solve(rhs_);
        }
        for (std::size_t i = lo_; i <= hi_; ++i) {
            const double vb = rhs_[i - lo_];
            s.u[i] += dt_ * vb;
            s.v[i] = 2.0 * vb - s.v[i];
        }
        if (data) {
            s.u[n] = data->second;
            s.v[n] = vbar_n;
        } else if (hi_ == n) {
            vbar_n = rhs_.back();
        }
        last_vbar_n_ = vbar_n;
        s.t += dt_;
    }

    // pivot * s + kappa * rho(s) = r with rho nondecreasing: the root lies
    // between 0 and r / pivot. Newton, falling back to bisection when it leaves
    // the bracket.
    double solve_boundary_scalar(double pivot, double r, const FeedbackLaw& law) const {
        if (r == 0.0) return 0.0;
        auto f = [&](double s) { return pivot * s + kappa_ * law.rho(s) - r; };
        double a = 0.0, b = r / pivot;
        if (a > b) std::swap(a, b);
        // residuals below this are roundoff in pivot * s - r
        auto noise = [&](double s) { return 4e-16 * (std::abs(r) + kappa_ * std::abs(law.rho(s))); };
        double fa = f(a), fb = f(b);
        if (std::abs(fa) <= noise(a)) return a;
        if (std::abs(fb) <= noise(b)) return b;
        if (fa * fb > 0.0) throw NumericalError("boundary feedback equation has no bracketed root; rho is not monotone");
        double s = 0.5 * (a + b);
        for (int it = 0; it < 200; ++it) {
            const double fs = f(s);
            if (std::abs(fs) <= noise(s)) return s;
            if ((fs < 0) == (fa < 0)) a = s, fa = fs;
            else b = s, fb = fs;
            const double df = pivot + kappa_ * law.rho_prime(s);
            double next = s - fs / df;
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - s) <= 1e-13 * std::max(1e-300, std::abs(next)) || b - a <= 1e-13 * std::abs(b)) return next;
            s = next;
        }
        throw NumericalError("boundary feedback solve did not converge");
    }

    const Grid* g_;
    BoundaryCondition bc_;
    double dt_;
    double kappa_ = 0.0;
    std::size_t lo_ = 0, hi_ = 0;
    Tridiagonal sys_;
    mutable std::vector<double> rhs_;
    mutable double last_vbar_n_ = 0.0;
};

/// Velocity-Verlet form of the leapfrog scheme (Dirichlet only), for cross-checks.
class LeapfrogStepper {
public:
    static constexpr double cfl_safety = 0.9;

    LeapfrogStepper(const Grid& g, double dt) : g_(&g), dt_(dt) {
        double amax = 0.0;
        for (double a : g.a_mid()) amax = std::max(amax, a);
        const double limit = cfl_safety * g.h() / std::sqrt(amax);
        if (!(std::abs(dt) <= limit))
            throw DomainError("CFL violation: |dt| = " + std::to_string(std::abs(dt)) + " exceeds " + std::to_string(limit));
    }
    void step(GridState& s) const {
        const double c = 0.5 * dt_;
        auto Au = apply_operator(*g_, s.u);
        for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += c * Au[i];
        for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] += dt_ * s.v[i];
        Au = apply_operator(*g_, s.u);
        for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += c * Au[i];
        project_admissible(*g_, s.u);
        project_admissible(*g_, s.v);
        s.t += dt_;
    }

private:
    const Grid* g_;
    double dt_;
};

// ---------------------------------------------------------------- simulation

struct EnergyTrace {
    std::vector<double> times, energy, boundary_u, boundary_v, boundary_flux, cumulative_trace;

    std::size_t size() const { return times.size(); }
    void push(double t, double e, double u1, double v1, double f1, double cum) {
        times.push_back(t);
        energy.push_back(e);
        boundary_u.push_back(u1);
        boundary_v.push_back(v1);
        boundary_flux.push_back(f1);
        cumulative_trace.push_back(cum);
    }

    void write_csv(std::ostream& os) const {
        os << "t,E,u1,v1,flux1,cumtrace\n" << std::setprecision(17);
        for (std::size_t k = 0; k < size(); ++k)
            os << times[k] << ',' << energy[k] << ',' << boundary_u[k] << ',' << boundary_v[k] << ','
               << boundary_flux[k] << ',' << cumulative_trace[k] << '\n';
    }
};

enum class Integrator { ImplicitMidpoint, Leapfrog };

struct SimConfig {
    Weight weight = Weight::power(0.5);
    std::size_t grid_n = 400;
    std::optional<double> dt;  // defaults to h/2
    double T_final = 1.0;
    BoundaryCondition bc = Dirichlet{};
    InitialData initial_data = RandomSmoothData{};
    Integrator integrator = Integrator::ImplicitMidpoint;
    std::size_t record_every = 1;    // trace sampling stride (the trace integral uses every step)
    std::size_t snapshot_every = 0;  // 0: no snapshots

    double resolved_dt() const { return dt.value_or(0.5 / static_cast<double>(grid_n)); }
};

struct SimulationResult {
    Grid grid;
    EnergyTrace trace;
    std::vector<GridState> snapshots;
    GridState final_state;
    double dt;
    std::size_t steps;
};

using StepObserver = std::function<void(const GridState&)>;

/// Generic driver; the three public entry points below add their preconditions.
inline SimulationResult simulate(const SimConfig& cfg, const StepObserver& observer = {}) {
    if (!(cfg.T_final > 0.0)) throw DomainError("T_final must be positive");
    if (cfg.record_every == 0) throw DomainError("record_every must be >= 1");
    Grid g(cfg.weight, cfg.grid_n);
    const double dt_nominal = cfg.resolved_dt();
    if (!(dt_nominal > 0.0)) throw DomainError("dt must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.T_final / dt_nominal - 1e-9));
    const double dt = cfg.T_final / static_cast<double>(steps);

    GridState s = make_initial_state(g, cfg.initial_data, cfg.bc);
    std::optional<MidpointStepper> mid;
    std::optional<LeapfrogStepper> leap;
    if (cfg.integrator == Integrator::Leapfrog) {
        if (!is_dirichlet(cfg.bc)) throw DomainError("leapfrog is only available for the conservative problem");
        leap.emplace(g, dt);
    } else {
        mid.emplace(g, cfg.bc, dt);
    }

    SimulationResult res{g, {}, {}, {}, dt, steps};
    double flux = boundary_flux(g, s), cum = 0.0;
    res.trace.push(s.t, discrete_energy(g, s), s.u.back(), s.v.back(), flux, cum);
    if (cfg.snapshot_every) res.snapshots.push_back(s);
    if (observer) observer(s);
    for (std::size_t k = 1; k <= steps; ++k) {
        if (mid) mid->step(s);
        else leap->step(s);
        const double f_new = boundary_flux(g, s);
        cum += 0.5 * dt * (flux * flux + f_new * f_new);
        flux = f_new;
        if (!std::isfinite(flux)) throw NumericalError("solution became non-finite at t = " + std::to_string(s.t));
        if (k % cfg.record_every == 0 || k == steps)
            res.trace.push(s.t, discrete_energy(g, s), s.u.back(), s.v.back(), flux, cum);
        if (cfg.snapshot_every && (k % cfg.snapshot_every == 0 || k == steps)) res.snapshots.push_back(s);
        if (observer) observer(s);
    }
    res.final_state = std::move(s);
    return res;
}

inline SimulationResult simulate_conservative(const SimConfig& cfg, const StepObserver& observer = {}) {
    if (!is_dirichlet(cfg.bc)) throw DomainError("simulate_conservative needs a Dirichlet right end");
    return simulate(cfg, observer);
}

inline SimulationResult simulate_linear_damped(const SimConfig& cfg) {
    const auto* l = std::get_if<LinearDamped>(&cfg.bc);
    if (!l) throw DomainError("simulate_linear_damped needs a LinearDamped boundary");
    if (!(l->beta >= 0.0)) throw DomainError("beta must be >= 0");
    return simulate(cfg);
}

inline SimulationResult simulate_nonlinear_damped(const SimConfig& cfg) {
    const auto* nl = std::get_if<NonlinearDamped>(&cfg.bc);
    if (!nl) throw DomainError("simulate_nonlinear_damped needs a NonlinearDamped boundary");
    if (!(nl->beta >= 0.0)) throw DomainError("beta must be >= 0");
    return simulate(cfg);
}

// ---------------------------------------------------------------- multiplier identities

struct MultiplierReport {
    // x u_x multiplier: a(1) int u_x(1)^2 = int int {u_t^2 + (a - x a') u_x^2} + 2 [int x u_x u_t]_0^T
    double le1_lhs = 0, le1_rhs = 0, le1_residual = 0;
    // u multiplier: int int {a u_x^2 - u_t^2} + [int u u_t]_0^T = 0
    double le2_value = 0, le2_scale = 0, le2_residual = 0;
};

/// Runs the conservative problem and evaluates both multiplier identities with
/// trapezoid quadrature in t (every step) and midpoint/trapezoid in x.
inline MultiplierReport verify_multiplier_identities(const SimConfig& cfg) {
    Grid g(cfg.weight, cfg.grid_n);
    const std::size_t n = g.n();
    const double h = g.h();
    std::vector<double> xm(n), am_minus(n);
    for (std::size_t i = 0; i < n; ++i) {
        xm[i] = (i + 0.5) * h;
        am_minus[i] = g.a_mid()[i] - xm[i] * cfg.weight.a_prime(xm[i]);
    }
    struct Sample { double ut2, bulk1, au2, xuxut, uut; };
    auto measure = [&](const GridState& s) {
        Sample m{l2_norm_sq(g, s.v), 0, 0, 0, inner(g, s.u, s.v)};
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (s.u[i + 1] - s.u[i]) / h;
            m.bulk1 += am_minus[i] * d * d * h;
            m.au2 += g.a_mid()[i] * d * d * h;
            m.xuxut += xm[i] * d * 0.5 * (s.v[i] + s.v[i + 1]) * h;
        }
        return m;
    };
    std::optional<Sample> first, prev;
    Sample last{};
    double I_ut2 = 0, I_bulk1 = 0, I_au2 = 0, dt = 0, t_prev = 0;
    auto obs = [&](const GridState& s) {
        const Sample m = measure(s);
        if (!first) first = m;
        if (prev) {
            dt = s.t - t_prev;
            I_ut2 += 0.5 * dt * (prev->ut2 + m.ut2);
            I_bulk1 += 0.5 * dt * (prev->bulk1 + m.bulk1);
            I_au2 += 0.5 * dt * (prev->au2 + m.au2);
        }
        prev = m;
        last = m;
        t_prev = s.t;
    };
    auto res = simulate_conservative(cfg, obs);
    MultiplierReport r;
    r.le1_lhs = g.a1() * res.trace.cumulative_trace.back();
    r.le1_rhs = I_ut2 + I_bulk1 + 2.0 * (last.xuxut - first->xuxut);
    const double s1 = std::max(std::abs(r.le1_lhs), std::abs(r.le1_rhs));
    r.le1_residual = s1 > 0 ? std::abs(r.le1_lhs - r.le1_rhs) / s1 : 0.0;
    r.le2_value = I_au2 - I_ut2 + (last.uut - first->uut);
    r.le2_scale = I_au2 + I_ut2;
    r.le2_residual = r.le2_scale > 0 ? std::abs(r.le2_value) / r.le2_scale : 0.0;
    return r;
}

// ---------------------------------------------------------------- auxiliary elliptic problem

struct AuxiliaryElliptic {
    double c = 0;                  // z = c int_0^x ds/a (weak) ; unused (0) in the strong regime
    std::vector<double> x, z;      // samples
    double energy_norm_sq = 0;     // int a z'^2 + beta a(1) z(1)^2
    double l2_sq = 0;              // int z^2
    double energy_bound = 0;       // a(1) lambda^2 / beta
    double l2_bound = 0;           // a(1) lambda^2 / (beta alpha_a)
    bool energy_ok = false, l2_ok = false;
};

namespace detail {
// int_0^x ds / a(s) for mu < 1, via s = x tau^q with q = 1/(1-mu) which removes the endpoint singularity.
inline double inverse_weight_integral(const Weight& w, double x) {
    if (x == 0.0) return 0.0;
    if (auto th = w.theta(); th && std::holds_alternative<PurePower>(w.kind())) return std::pow(x, 1.0 - *th) / (1.0 - *th);
    const double q = 1.0 / (1.0 - w.mu_a());
    return integrate_gl(
        [&](double tau) {
            if (tau == 0.0) return 0.0;
            const double s = x * std::pow(tau, q);
            return x * q * std::pow(tau, q - 1.0) / w.a(s);
        },
        0.0, 1.0, 8);
}
} // namespace detail

inline AuxiliaryElliptic solve_auxiliary_elliptic(const Weight& w, double beta, double lambda, std::size_t samples = 401) {
    if (!(beta > 0.0)) throw DomainError("auxiliary elliptic problem needs beta > 0");
    const auto k = compute_constants(w, beta);
    const double a1 = w.a_at_1();
    AuxiliaryElliptic r;
    r.x.resize(samples);
    r.z.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) r.x[i] = static_cast<double>(i) / (samples - 1);
    if (w.regime() == Regime::Strong) {
        const double z0 = lambda / beta;
        std::fill(r.z.begin(), r.z.end(), z0);
        r.energy_norm_sq = beta * a1 * z0 * z0;
        r.l2_sq = z0 * z0;
    } else {
        const double I1 = detail::inverse_weight_integral(w, 1.0);
        if (!std::isfinite(I1)) throw NumericalError("int_0^1 1/a diverges; the weight is not weakly degenerate");
        r.c = lambda / (1.0 / a1 + beta * I1);
        for (std::size_t i = 0; i < samples; ++i) r.z[i] = r.c * detail::inverse_weight_integral(w, r.x[i]);
        const double z1 = r.c * I1;
        r.energy_norm_sq = r.c * r.c * I1 + beta * a1 * z1 * z1;  // int a (c/a)^2 = c^2 int 1/a
        r.l2_sq = integrate_gl(
            [&](double x) {
                const double z = r.c * detail::inverse_weight_integral(w, x);
                return z * z;
            },
            0.0, 1.0, 16);
    }
    r.energy_bound = a1 * lambda * lambda / beta;
    r.l2_bound = a1 * lambda * lambda / (beta * *k.alpha_a);
    const double slack = 1e-12 * std::max(1.0, r.energy_bound);
    r.energy_ok = r.energy_norm_sq <= r.energy_bound + slack;
    r.l2_ok = r.l2_sq <= r.l2_bound + slack;
    return r;
}

} // namespace degenwave
