#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "pcax/levy.hpp"

namespace pcax {

/// E^x[e^{-q tau_c^+}; up-exit of [0,c] before ruin] = W(x)/W(c).
inline double exit_up(const ScaleFunction& sf, double x, double c) {
    if (!(c > 0.0)) throw std::domain_error("exit_up: c must be > 0");
    if (!(x >= 0.0 && x <= c)) throw std::domain_error("exit_up: x outside [0, c]");
    return sf.w(x) / sf.w(c);
}

/// E^x[e^{-q tau_0^-}; ruin before up-exit of [0,c]] = Z(x) - Z(c) W(x)/W(c).
inline double exit_down(const ScaleFunction& sf, double x, double c) {
    if (!(c > 0.0)) throw std::domain_error("exit_down: c must be > 0");
    if (!(x >= 0.0 && x <= c)) throw std::domain_error("exit_down: x outside [0, c]");
    return sf.z(x) - sf.z(c) * sf.w(x) / sf.w(c);
}

/// E^x[e^{-q tau_0^-}] = Z(x) - (q/phi_q) W(x); the c -> inf limit of exit_down.
inline double ruin_laplace(const ScaleFunction& sf, double x) {
    return sf.z(x) - sf.q / sf.roots.phi_q * sf.w(x);
}

// Law of the first drawdown passage over bprime, started from the running
// maximum (Pistorius reflected-process exit kernels). With k = W'(b')/W(b'):
//
//   creeping:  E[e^{-qT}; S_T - X_T = b', S_T in dm]
//                = creep_coeff * e^{-(m-s)k} dm,
//   by a jump: E[e^{-qT}; drawdown y, jump lands h below, S_T- in dm]
//                = Pi(dh) dy dm (W'(y) - k W(y)) e^{-(m-s)k},
//
// over 0 <= y < b', h in (y-b, y-b'); jumps overshooting depth b are outside
// this law and trigger no corrective action.
struct TriggerKernels {
    double creep_coeff = 0.0;  // sigma^2/2 (W'(b')^2/W(b') - W''(b'))
    double decay = 0.0;        // k = W'(b')/W(b')
    double bprime = 0.0;
};

inline TriggerKernels trigger_kernels(const ScaleFunction& sf0, double bprime) {
    if (!(bprime > 0.0)) throw std::domain_error("trigger_kernels: bprime must be > 0");
    const double w = sf0.w(bprime);
    const double w1 = sf0.w(bprime, 1);
    const double w2 = sf0.w(bprime, 2);
    const double s2h = 0.5 * sf0.regime.sigma * sf0.regime.sigma;
    return TriggerKernels{s2h * (w1 * w1 / w - w2), w1 / w, bprime};
}

/// The unique x with W'(x)/W(x) = 1, below which drawdown-triggered costs are
/// finite. Absent when phi_q >= 1 (the log-derivative never reaches 1).
inline std::optional<double> critical_bprime(const ScaleFunction& sf0) {
    if (sf0.roots.phi_q >= 1.0) return std::nullopt;
    // log-derivative decreases from +inf at 0+ toward phi_q < 1
    double lo = 1e-12, hi = 1.0;
    while (sf0.log_deriv(hi) > 1.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6)
            throw std::runtime_error("critical_bprime: bracketing failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sf0.log_deriv(mid) > 1.0 ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    if (!(std::abs(sf0.log_deriv(x) - 1.0) < 1e-10))
        throw std::runtime_error("critical_bprime: bisection did not converge");
    return x;
}

}  // namespace pcax
