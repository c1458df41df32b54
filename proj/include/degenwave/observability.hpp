#pragma once

// Boundary observability: trace quotients of conservative runs, the two-sided
// bracket they must satisfy, the eigen-solution upper bounds on C_T as theta
// approaches 2, and the silent-horizon experiment for theta >= 2.

#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dynamics.hpp"
#include "spectral.hpp"
#include "weights.hpp"

namespace degenwave {

struct ObservabilityReport {
    std::optional<double> theta;
    double T = 0;
    double quotient = 0;      // int_0^T u_x(t,1)^2 dt / E(0)
    double lower_bound = 0;   // (2 - mu) T - 4 / min{1, a(1)} - 2 mu sqrt(C_a)
    double direct_bound = 0;  // 6 T + 1 / min{1, a(1)}
    double a1 = 1;
    double energy0 = 0;
    std::string data_label;
};

/// Conservative run to cfg.T_final; returns the trace quotient and E(0).
inline std::pair<double, double> trace_quotient_with_energy(const SimConfig& cfg) {
    SimConfig c = cfg;
    c.record_every = std::max<std::size_t>(c.record_every, 1u << 30);  // only first and last samples are needed
    const auto res = simulate_conservative(c);
    const double e0 = res.trace.energy.front();
    if (!(e0 > 0.0)) throw DomainError("trace quotient needs nonzero initial energy");
    return {res.trace.cumulative_trace.back() / e0, e0};
}

inline double trace_quotient(const SimConfig& cfg) { return trace_quotient_with_energy(cfg).first; }

inline ObservabilityReport observe(const SimConfig& cfg, std::string label = "") {
    ObservabilityReport r;
    r.theta = cfg.weight.theta();
    r.T = cfg.T_final;
    std::tie(r.quotient, r.energy0) = trace_quotient_with_energy(cfg);
    r.lower_bound = observability_bracket(cfg.weight, cfg.T_final);
    r.direct_bound = direct_bound(cfg.weight, cfg.T_final);
    r.a1 = cfg.weight.a_at_1();
    r.data_label = std::move(label);
    return r;
}

struct BoundsCheck {
    bool lower_ok = false, upper_ok = false;
    bool informative = false;  // lower bracket positive
    double lower_margin = 0;   // a(1) q - bracket
    double upper_margin = 0;   // direct bound - a(1) q
    bool passed() const { return lower_ok && upper_ok; }
};

inline BoundsCheck check_bounds(const ObservabilityReport& r) {
    BoundsCheck b;
    const double aq = r.a1 * r.quotient;
    b.informative = r.lower_bound > 0.0;
    b.lower_margin = aq - r.lower_bound;
    b.upper_margin = r.direct_bound - aq;
    b.lower_ok = b.lower_margin >= 0.0;
    b.upper_ok = b.upper_margin >= 0.0;
    return b;
}

// ---------------------------------------------------------------- blow-up as theta -> 2

struct BlowupRow {
    double theta = 0;
    double bound = 0;           // (2 - theta) T
    double ratio_sine = 0;      // closed form for u0 = 0, u1 = sqrt(lambda) y
    double ratio_optimal = 0;   // closed form minimized over the phase of the eigen-solution
    double phase = 0;
    std::optional<double> simulated;  // simulated quotient for the optimal phase
    std::optional<double> simulated_rel_error;
};

struct BlowupSimulation {
    std::size_t grid_n;
    double dt;
};

/// For each theta, the best eigen-solution upper estimate of C_T(theta). When
/// `sim` is given, the optimal-phase datum is also simulated (one entry per theta).
inline std::vector<BlowupRow> blowup_sweep(const std::vector<double>& thetas, double T,
                                           const std::vector<BlowupSimulation>& sim = {}) {
    if (!sim.empty() && sim.size() != thetas.size()) throw DomainError("one simulation setting per theta is required");
    std::vector<BlowupRow> rows;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double th = thetas[k];
        const EigenPair ep(th);
        BlowupRow r;
        r.theta = th;
        r.bound = (2.0 - th) * T;
        r.ratio_sine = ep.trace_ratio(T);
        r.phase = ep.optimal_phase(T);
        r.ratio_optimal = ep.min_trace_ratio(T);
        if (!sim.empty()) {
            SimConfig c;
            c.weight = Weight::power(th);
            c.grid_n = sim[k].grid_n;
            c.dt = sim[k].dt;
            c.T_final = T;
            c.initial_data = EigenData{th, r.phase};
            r.simulated = trace_quotient(c);
            r.simulated_rel_error = std::abs(*r.simulated / r.ratio_optimal - 1.0);
        }
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------- theta >= 2

/// Time before which data supported in [x1, x2] cannot reach x = 1:
/// log(1/x2) for theta = 2, 2 (x2^{1 - theta/2} - 1) / (theta - 2) for theta > 2.
inline double silent_horizon(double theta, double x2) {
    if (!(theta >= 2.0)) throw DomainError("the silent horizon is defined for theta >= 2");
    if (!(x2 > 0.0 && x2 < 1.0)) throw DomainError("support end must lie in (0,1)");
    if (theta == 2.0) return std::log(1.0 / x2);
    return 2.0 * (std::pow(x2, 1.0 - 0.5 * theta) - 1.0) / (theta - 2.0);
}

struct FailureReport {
    double theta = 0, x1 = 0, x2 = 0, T = 0;
    double horizon = 0;         // predicted silent horizon
    double energy0 = 0;
    double trace_energy = 0;    // int_0^T u_x(t,1)^2 dt
    double trace_ratio = 0;     // trace_energy / E(0)
    EnergyTrace trace;
};

inline FailureReport failure_demo(double theta, double x1, double x2, double T, std::size_t grid_n,
                                  std::optional<double> dt = std::nullopt) {
    if (!(x1 > 0.0 && x1 < x2 && x2 < 1.0)) throw DomainError("support [x1,x2] must lie strictly inside (0,1)");
    SimConfig c;
    c.weight = Weight::nonadmissible(theta);
    c.grid_n = grid_n;
    c.dt = dt;
    c.T_final = T;
    c.initial_data = BumpData{0.5 * (x1 + x2), 0.5 * (x2 - x1)};
    c.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(0.01 / c.resolved_dt()));
    auto res = simulate_conservative(c);
    FailureReport r;
    r.theta = theta;
    r.x1 = x1;
    r.x2 = x2;
    r.T = T;
    r.horizon = silent_horizon(theta, x2);
    r.energy0 = res.trace.energy.front();
    r.trace_energy = res.trace.cumulative_trace.back();
    r.trace_ratio = r.trace_energy / r.energy0;
    r.trace = std::move(res.trace);
    return r;
}

} // namespace degenwave
