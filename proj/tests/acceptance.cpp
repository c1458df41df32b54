// Acceptance checks, one line per criterion. `acceptance --only N` runs one.
// Exit status is nonzero if any selected criterion fails.

#include <boost/math/special_functions/bessel.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "degenwave/degenwave.hpp"

using namespace degenwave;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SimConfig conservative(double theta, std::size_t n, double T, InitialData data) {
    SimConfig c;
    c.weight = Weight::power(theta);
    c.grid_n = n;
    c.dt = 0.5 / static_cast<double>(n);
    c.T_final = T;
    c.initial_data = std::move(data);
    return c;
}

// ---------------------------------------------------------------- 1

Outcome energy_conservation() {
    bool ok = true;
    std::ostringstream os;
    for (double th : {0.0, 0.5, 1.5}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = simulate_conservative(conservative(th, 400, 10.0, RandomSmoothData{1}));
        const double secs = seconds_since(t0);
        double drift = 0.0;
        for (double e : res.trace.energy) drift = std::max(drift, std::abs(e / res.trace.energy.front() - 1.0));
        ok = ok && drift <= 1e-8 && secs < 10.0;
        os << fmt("theta=%.1f drift=%.2e (%.2fs); ", th, drift, secs);
    }
    return {ok, os.str() + "n=400 dt=h/2 T=10, need drift <= 1e-8 and < 10 s"};
}

// ---------------------------------------------------------------- 2, 3

struct SweepCell { double theta, T; std::uint64_t seed; };

std::vector<ObservabilityReport> sweep(const std::vector<SweepCell>& cells) {
    return parallel_map<ObservabilityReport>(cells.size(), [&](std::size_t i) {
        const auto& c = cells[i];
        return observe(conservative(c.theta, 400, c.T, RandomSmoothData{c.seed}));
    });
}

Outcome direct_inequality() {
    std::vector<SweepCell> cells;
    for (double th : {0.5, 1.5})
        for (double T : {1.0, 5.0})
            for (std::uint64_t s = 1; s <= 20; ++s) cells.push_back({th, T, s});
    const auto reps = sweep(cells);
    std::size_t bad = 0;
    double worst = 0.0;  // largest a(1) q / bound
    for (const auto& r : reps) {
        const auto b = check_bounds(r);
        bad += b.upper_ok ? 0 : 1;
        worst = std::max(worst, r.a1 * r.quotient / r.direct_bound);
    }
    return {bad == 0, fmt("%zu runs (theta 0.5,1.5 x T 1,5 x 20 seeds, n=400), %zu violations, max a(1)q/(6T+1/min{1,a(1)}) = %.3f",
                          reps.size(), bad, worst)};
}

Outcome observability_lower_bound() {
    std::vector<SweepCell> cells;
    for (double th : {0.5, 1.5}) {
        const double T = 2.0 * compute_constants(Weight::power(th)).T_a;
        for (std::uint64_t s = 1; s <= 20; ++s) cells.push_back({th, T, s});
    }
    const auto reps = sweep(cells);
    std::size_t bad = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    bool informative = true;
    for (const auto& r : reps) {
        const auto b = check_bounds(r);
        bad += b.passed() ? 0 : 1;
        min_margin = std::min(min_margin, b.lower_margin);
        informative = informative && b.informative;
    }
    return {bad == 0, fmt("%zu runs at T=2T_a (T=%.3f, %.3f), %zu bracket failures, min lower margin %.3f, lower bracket %s",
                          reps.size(), cells.front().T, cells.back().T, bad, min_margin,
                          informative ? "positive" : "NOT positive")};
}

// ---------------------------------------------------------------- 4, 5

Outcome eigen_trace() {
    bool ok = true;
    std::ostringstream os;
    for (double th : {1.0, 1.5}) {
        const EigenPair ep(th);
        const double T = 10.0;
        // phase 0: u0 = 0, u1 = sqrt(lambda) y
        const double q = trace_quotient(conservative(th, 800, T, EigenData{th, 0.0}));
        const double closed = ep.trace_ratio(T);
        const double err = std::abs(q / closed - 1.0);
        const bool strict = q < (2.0 - th) * T;
        ok = ok && err <= 0.02 && strict;
        os << fmt("theta=%.1f sim=%.4f closed=%.4f err=%.2e, (2-theta)T=%.2f %s; ", th, q, closed, err,
                  (2.0 - th) * T, strict ? "below" : "EXCEEDED");
    }
    return {ok, os.str() + "n=800 dt=h/2"};
}

Outcome blowup() {
    const std::vector<double> thetas{1.0, 1.5, 1.8, 1.95};
    // theta = 1.95 needs a fine grid: the eigenfunction lives in a layer of width ~ 1e-3 at x = 0
    const auto rows = blowup_sweep(thetas, 10.0, {{800, 0.5 / 800}, {800, 0.5 / 800}, {800, 0.5 / 800}, {12800, 0.01}});
    bool decreasing = true, below = true, sim_ok = true;
    std::ostringstream os;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (k) decreasing = decreasing && r.ratio_optimal < rows[k - 1].ratio_optimal;
        below = below && r.ratio_optimal <= r.bound;
        sim_ok = sim_ok && *r.simulated_rel_error <= 0.02;
        os << fmt("theta=%.2f bound=%.4f (sine %.4f) <= %.2f sim err %.1e; ", r.theta, r.ratio_optimal, r.ratio_sine,
                  r.bound, *r.simulated_rel_error);
    }
    os << (decreasing ? "strictly decreasing" : "NOT decreasing");
    return {decreasing && below && sim_ok, os.str()};
}

// ---------------------------------------------------------------- 6

Outcome non_observability() {
    const auto coarse = failure_demo(2.0, 0.1, 0.3, 1.0, 800, 0.5 / 800);
    const auto fine = failure_demo(2.0, 0.1, 0.3, 1.0, 1600, 0.5 / 1600);
    const double shrink = coarse.trace_ratio / fine.trace_ratio;
    const bool ok = fine.trace_ratio <= 1e-6 && shrink >= 4.0;
    return {ok, fmt("theta=2 bump on [0.1,0.3], T=1 (horizon %.3f): trace/E0 = %.2e (n=800), %.2e (n=1600), shrink %.1ex",
                    fine.horizon, coarse.trace_ratio, fine.trace_ratio, shrink)};
}

// ---------------------------------------------------------------- 7

// Independent oracle: bisection on Boost's J_nu from a sign change bracketing the first zero.
double boost_first_zero(double nu) {
    auto J = [nu](double x) { return boost::math::cyl_bessel_j(nu, x); };
    double lo = std::max(1e-3, nu), hi = lo;
    while (J(hi) > 0.0) lo = hi, hi += 0.1;
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (J(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome bessel_oracle() {
    const double e0 = std::abs(first_bessel_zero(0.0) - boost_first_zero(0.0));
    const double e1 = std::abs(first_bessel_zero(1.0) - boost_first_zero(1.0));
    const double eh = std::abs(first_bessel_zero(0.5) - std::numbers::pi);
    const bool ok = e0 <= 1e-10 && e1 <= 1e-10 && eh <= 1e-12;
    return {ok, fmt("|j0 - oracle| = %.1e, |j1 - oracle| = %.1e (need 1e-10), |j_{1/2} - pi| = %.1e (need 1e-12)", e0, e1,
                    eh)};
}

// ---------------------------------------------------------------- 8

Outcome hum() {
    const auto t0 = std::chrono::steady_clock::now();
    HumProblem p;
    p.weight = Weight::power(0.5);
    p.T = 1.5 * compute_constants(p.weight).T_a;
    p.grid_n = 200;
    const auto s = solve_hum(p);
    const double r = s.final_state_norm / s.initial_norm;
    HumProblem c = p;
    c.weight = Weight::power(0.0);
    c.T = 1.5 * compute_constants(c.weight).T_a;
    const auto sc = solve_hum(c);
    const double rc = sc.final_state_norm / sc.initial_norm;
    const double secs = seconds_since(t0);
    const bool ok = s.converged && s.iterations <= 500 && r <= 1e-2 && rc <= 1e-3 && secs < 120.0;
    return {ok, fmt("theta=0.5 T=%.3f n=200: CG %s in %zu its, final/initial = %.2e; theta=0: %.2e (need 1e-3); %.1fs", p.T,
                    s.converged ? "converged" : "DID NOT converge", s.iterations, r, rc, secs)};
}

// ---------------------------------------------------------------- 9

Outcome linear_stabilization() {
    const Weight w = Weight::power(0.5);
    const double M = *compute_constants(w, 1.0).M_a_beta;
    SimConfig c = conservative(0.5, 400, 3.0 * M, RandomSmoothData{3});
    c.bc = LinearDamped{1.0};
    c.record_every = 50;
    const auto res = simulate_linear_damped(c);
    const auto& tr = res.trace;
    const double E0 = tr.energy.front();
    std::size_t checked = 0, bad = 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.times[k] < M) continue;
        ++checked;
        bad += tr.energy[k] > E0 * std::exp(1.0 - tr.times[k] / M) ? 1 : 0;
    }
    const auto fit = fit_decay_rate(tr, RateFamily::Exponential, FitWindow{M});
    const bool ok = checked > 0 && bad == 0 && fit.r_squared >= 0.99;
    return {ok, fmt("M=%.3f T=3M n=400: %zu/%zu samples above E0 e^{1-t/M}; ln E fit on [%.1f, %.1f]: rate %.4f R^2=%.5f", M,
                    bad, checked, fit.t_begin, fit.t_end, fit.exponent, fit.r_squared)};
}

// ---------------------------------------------------------------- 10

Outcome nonlinear_exponents() {
    const std::vector<double> ps{2.0, 3.0};
    struct Run { double slope, drop, secs; };
    const auto runs = parallel_map<Run>(ps.size(), [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        SimConfig c = conservative(0.5, 400, 1e4, FunctionData{{}, [](double x) {
                                       return 10.0 * x * std::sin(1.5 * std::numbers::pi * x);
                                   }});
        c.bc = NonlinearDamped{1.0, FeedbackLaw::polynomial(ps[i])};
        c.record_every = 40;
        const auto res = simulate_nonlinear_damped(c);
        const auto fit = fit_decay_rate(res.trace, RateFamily::Power, FitWindow{1e3});
        return Run{fit.exponent, fit.energy_drop, seconds_since(t0)};
    });
    bool ok = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double expect = -2.0 / (ps[i] - 1.0);
        const double err = std::abs(runs[i].slope / expect - 1.0);
        ok = ok && err <= 0.15 && runs[i].drop >= 1e3 && runs[i].secs <= 600.0;
        os << fmt("p=%.0f slope %.3f vs %.3f (%.1f%%), E0/E(T)=%.1e, %.0fs; ", ps[i], runs[i].slope, expect, 100 * err,
                  runs[i].drop, runs[i].secs);
    }
    return {ok, os.str() + "fit on [1e3, 1e4], n=400"};
}

// ---------------------------------------------------------------- 11

Outcome convexity_oracle() {
    double worst = 0.0;
    for (double p : {2.0, 3.0}) {
        const DecayModel m(FeedbackLaw::polynomial(p));
        for (double x : m.grid()) {
            const double y = 0.5 * (p + 1) * std::pow(x, 0.5 * (p - 1));
            const double Lx = x * (p - 1) / (p + 1);
            worst = std::max({worst, std::abs(m.lambda_H(x) * (p + 1) / 2.0 - 1.0), std::abs(m.L(y) / Lx - 1.0),
                              std::abs(m.Hstar_numeric(y) / (y * Lx) - 1.0)});
        }
    }
    bool unit = true;
    std::string offender;
    for (const char* spec : {"poly:2", "poly:3", "polylog:3,1", "expinvsq", "explog:3"})
        if (!DecayModel(FeedbackLaw::parse(spec)).lambda_in_unit_interval()) unit = false, offender = spec;
    return {worst <= 1e-4 && unit,
            fmt("p=2,3 worst relative error of H*, L, Lambda_H on the model grid: %.1e (need 1e-4); Lambda_H in [0,1] for all "
                "families: %s%s",
                worst, unit ? "yes" : "NO ", offender.c_str())};
}

// ---------------------------------------------------------------- 12

Outcome multiplier_identities() {
    bool ok = true;
    std::ostringstream os;
    for (double th : {0.0, 1.5}) {
        std::vector<MultiplierReport> reps;
        for (std::size_t n : {100, 200, 400})
            reps.push_back(verify_multiplier_identities(conservative(th, n, 2.0, RandomSmoothData{3})));
        auto order = [&](auto field) {
            const double a = reps[1].*field, b = reps[2].*field;
            if (b <= 1e-9) return std::numeric_limits<double>::infinity();  // at roundoff: nothing left to converge
            return std::log2(a / b);
        };
        const double o1 = order(&MultiplierReport::le1_residual), o2 = order(&MultiplierReport::le2_residual);
        const bool cell = reps[2].le1_residual <= 1e-2 && reps[2].le2_residual <= 1e-2 && o1 >= 1.75 && o2 >= 1.75;
        ok = ok && cell;
        os << fmt("theta=%.1f le1 %.1e/%.1e/%.1e (order %.2f), le2 %.1e/%.1e/%.1e (order %.2f); ", th, reps[0].le1_residual,
                  reps[1].le1_residual, reps[2].le1_residual, o1, reps[0].le2_residual, reps[1].le2_residual,
                  reps[2].le2_residual, o2);
    }
    return {ok, os.str() + "n=100/200/400, T=2"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria{
        energy_conservation, direct_inequality, observability_lower_bound, eigen_trace,    blowup,
        non_observability,   bessel_oracle,     hum,                       linear_stabilization,
        nonlinear_exponents, convexity_oracle,  multiplier_identities};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) selected.push_back(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--only N]...\n");
            return 2;
        }
    }
    if (selected.empty())
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
    int failures = 0;
    for (int k : selected) {
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "no criterion %d\n", k);
            return 2;
        }
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", k, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures ? 1 : 0;
}
