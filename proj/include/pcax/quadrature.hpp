#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pcax {

/// Adaptive Gauss-Kronrod integration of f over [a, b] (b may be infinite).
/// Fails loudly if the error estimate exceeds max(abs_tol, rel_tol * |I|).
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                 double rel_tol = 1e-9) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, 15, 0.1 * rel_tol, &err);
    if (!(err <= std::max(abs_tol, rel_tol * std::abs(v))))
        throw std::runtime_error("integrate: requested tolerance not reached");
    return v;
}

}  // namespace pcax
