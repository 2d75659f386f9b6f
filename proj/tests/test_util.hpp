#pragma once

// Shared fixtures and independent oracles for the test suite. Oracles here
// must not reuse the closed-form paths they are checking.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "pcax/cost.hpp"

namespace testutil {

// The published example parameter set used throughout the tests.
inline pcax::Scenario paper_scenario(double bprime = 0.5401) {
    pcax::Scenario s;
    s.regime0 = {0.2, 0.2, 1.0, 10.0};
    s.regime1 = {0.1, 0.1, 1.0, 10.0};
    s.q = 0.1;
    s.b = 1.0;
    s.a_target = 0.3;
    s.bprime = bprime;
    s.run_rate = 1.0;
    s.penalty_coeff = 1.0;
    return s;
}

// Bracketing bisection for psi(lam) = q on [lo, hi]; requires a sign change.
// Independent of the closed-form cubic solver.
inline double bisect_psi_root(const pcax::RegimeParams& r, double q, double lo,
                              double hi) {
    auto f = [&](double x) { return pcax::laplace_exponent(r, x) - q; };
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) throw std::runtime_error("bisect_psi_root: no sign change");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double fd1(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Fourth-order five-point stencil; the plain second difference cannot reach
// 1e-6 relative accuracy on functions with |f''''| ~ 1e5.
inline double fd2(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
            f(x - 2 * h)) /
           (12.0 * h * h);
}

}  // namespace testutil
