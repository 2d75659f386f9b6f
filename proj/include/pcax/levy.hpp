#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace pcax {

// One regime of the log-asset process
//
//   X_t = mu t + sigma B_t - sum_{j<=N_t} eps_j,  eps_j ~ Exp(jump_rate),
//
// with N a Poisson process of rate jump_intensity. Spectrally negative;
// sigma > 0 is required so that levels can be crossed continuously and the
// scale function is twice differentiable.
struct RegimeParams {
    double mu = 0.0;              // drift per unit time, >= 0
    double sigma = 0.0;           // volatility per sqrt(time), > 0
    double jump_intensity = 0.0;  // Poisson arrival rate, > 0
    double jump_rate = 0.0;       // inverse mean jump size, > 0

    void validate() const {
        if (!(std::isfinite(mu) && mu >= 0.0))
            throw std::invalid_argument("RegimeParams: mu must be finite and >= 0");
        if (!(std::isfinite(sigma) && sigma > 0.0))
            throw std::invalid_argument("RegimeParams: sigma must be > 0");
        if (!(std::isfinite(jump_intensity) && jump_intensity > 0.0))
            throw std::invalid_argument("RegimeParams: jump_intensity must be > 0");
        if (!(std::isfinite(jump_rate) && jump_rate > 0.0))
            throw std::invalid_argument("RegimeParams: jump_rate must be > 0");
    }
};

/// psi(lam) = sigma^2 lam^2 / 2 + mu lam - a lam / (rho + lam).
/// Defined for lam != -rho; convex on [0, inf) with psi(0) = 0.
inline double laplace_exponent(const RegimeParams& r, double lam) {
    const double den = r.jump_rate + lam;
    if (std::abs(den) < 1e-14 * (1.0 + r.jump_rate))
        throw std::domain_error("laplace_exponent: pole at lam = -jump_rate");
    return 0.5 * r.sigma * r.sigma * lam * lam + r.mu * lam -
           r.jump_intensity * lam / den;
}

/// psi'(lam) = sigma^2 lam + mu - a rho / (rho + lam)^2.
inline double laplace_exponent_deriv(const RegimeParams& r, double lam) {
    const double den = r.jump_rate + lam;
    if (std::abs(den) < 1e-14 * (1.0 + r.jump_rate))
        throw std::domain_error("laplace_exponent_deriv: pole at lam = -jump_rate");
    return r.sigma * r.sigma * lam + r.mu -
           r.jump_intensity * r.jump_rate / (den * den);
}

// The three real solutions of psi(lam) = q, sorted phi_q > root_mid > root_low.
struct RootSet {
    double phi_q = 0.0;     // largest root, > 0
    double root_mid = 0.0;
    double root_low = 0.0;
    double q = 0.0;
};

namespace detail {

// Three real roots of t^3 + c2 t^2 + c1 t + c0 = 0 by the trigonometric
// method. Throws if the cubic does not have three distinct real roots.
inline std::array<double, 3> solve_real_cubic(double c2, double c1, double c0) {
    const double p = c1 - c2 * c2 / 3.0;
    const double q = c0 - c2 * c1 / 3.0 + 2.0 * c2 * c2 * c2 / 27.0;
    const double disc = 4.0 * p * p * p + 27.0 * q * q;
    if (!(disc < 0.0))
        throw std::domain_error(
            "solve_psi_roots: psi(lam) = q does not have three distinct real "
            "roots; parameters are outside the supported family");
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double c = 3.0 * q / (p * m);
    c = std::clamp(c, -1.0, 1.0);
    const double phi = std::acos(c);
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k)
        out[k] = m * std::cos((phi - 2.0 * M_PI * k) / 3.0) - c2 / 3.0;
    return out;
}

}  // namespace detail

/// Roots of psi(lam) = q. Clearing the (rho + lam) denominator gives the cubic
///   (sigma^2/2) lam^3 + (mu + sigma^2 rho / 2) lam^2
///   + (mu rho - a - q) lam - q rho = 0,
/// solved in closed form and then polished by Newton steps on psi(lam) - q.
inline RootSet solve_psi_roots(const RegimeParams& r, double q) {
    r.validate();
    if (!(std::isfinite(q) && q > 0.0))
        throw std::invalid_argument("solve_psi_roots: q must be > 0");

    const double s2h = 0.5 * r.sigma * r.sigma;
    auto roots = detail::solve_real_cubic(
        (r.mu + s2h * r.jump_rate) / s2h,
        (r.mu * r.jump_rate - r.jump_intensity - q) / s2h,
        (-q * r.jump_rate) / s2h);

    for (double& lam : roots) {
        for (int it = 0; it < 3; ++it) {
            const double f = laplace_exponent(r, lam) - q;
            const double fp = laplace_exponent_deriv(r, lam);
            if (fp == 0.0) break;
            const double step = f / fp;
            // a Newton step must not cross the pole of psi
            const double next = lam - step;
            if ((lam > -r.jump_rate) != (next > -r.jump_rate)) break;
            lam = next;
            if (std::abs(f) < 1e-15 * std::max(1.0, q)) break;
        }
    }
    std::sort(roots.begin(), roots.end(), std::greater<>());

    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(roots[i] - roots[j]) < 1e-9 * (1.0 + std::abs(roots[i])))
                throw std::domain_error(
                    "solve_psi_roots: nearly coincident roots; the "
                    "three-exponential scale function degenerates");

    for (double lam : roots) {
        const double res = std::abs(laplace_exponent(r, lam) - q);
        if (!(res <= 1e-12 * std::max(1.0, q)))
            throw std::runtime_error("solve_psi_roots: root refinement failed");
    }
    if (!(roots[0] > 0.0))
        throw std::runtime_error("solve_psi_roots: largest root must be positive");
    return RootSet{roots[0], roots[1], roots[2], q};
}

// q-scale function of one regime,
//
//   W(x) = sum_i e^{root_i x} / psi'(root_i),   x >= 0,
//
// extended by W = 0 on (-inf, 0). Strictly positive and increasing on
// (0, inf), W(0) = 0 and W'(0+) = 2/sigma^2 (unbounded variation), and
// e^{-phi_q x} W(x) increases to 1/psi'(phi_q). The companion function is
// Z(x) = 1 + q * int_0^x W.
//
// Immutable after construction; all evaluations are pure.
struct ScaleFunction {
    RootSet roots;
    std::array<double, 3> weights{};  // 1/psi'(root_i)
    RegimeParams regime;
    double q = 0.0;

    double root(int i) const {
        return i == 0 ? roots.phi_q : (i == 1 ? roots.root_mid : roots.root_low);
    }

    /// order-th derivative of W at x (order in {0,1,2}); 0 for x < 0.
    double w(double x, int order = 0) const {
        if (order < 0 || order > 2)
            throw std::invalid_argument("ScaleFunction::w: order must be 0, 1 or 2");
        if (x < 0.0) return 0.0;
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double ri = root(i);
            double t = weights[i] * std::exp(ri * x);
            for (int d = 0; d < order; ++d) t *= ri;
            acc += t;
        }
        return acc;
    }

    /// Z(x) = 1 + q int_0^x W(y) dy; equals 1 on (-inf, 0].
    double z(double x) const {
        if (x <= 0.0) return 1.0;
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double ri = root(i);
            acc += weights[i] * (std::exp(ri * x) - 1.0) / ri;
        }
        return 1.0 + q * acc;
    }

    /// e^{-phi_q x} W(x), computed without overflow for large x.
    double w_scaled(double x) const {
        if (x < 0.0) return 0.0;
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
            acc += weights[i] * std::exp((root(i) - roots.phi_q) * x);
        return acc;
    }

    /// W'(x)/W(x); strictly decreasing on (0, inf) with limit phi_q.
    double log_deriv(double x) const { return w(x, 1) / w(x, 0); }
};

inline ScaleFunction build_scale(const RegimeParams& r, double q) {
    ScaleFunction sf;
    sf.roots = solve_psi_roots(r, q);
    sf.regime = r;
    sf.q = q;
    for (int i = 0; i < 3; ++i) {
        const double d = laplace_exponent_deriv(r, sf.root(i));
        if (d == 0.0 || !std::isfinite(1.0 / d))
            throw std::domain_error("build_scale: psi' vanishes at a root");
        sf.weights[i] = 1.0 / d;
    }
    return sf;
}

inline double scale_w(const ScaleFunction& sf, double x, int order = 0) {
    return sf.w(x, order);
}
inline double scale_z(const ScaleFunction& sf, double x) { return sf.z(x); }
inline double scale_w_scaled(const ScaleFunction& sf, double x) {
    return sf.w_scaled(x);
}

}  // namespace pcax
