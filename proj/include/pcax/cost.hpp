#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "pcax/fluctuation.hpp"
#include "pcax/levy.hpp"
#include "pcax/quadrature.hpp"

namespace pcax {

/// Signals an expected cost that is infinite for the requested trigger level
/// (W0'(b')/W0(b') <= 1, or a multi-round series whose ratio reaches 1).
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A full problem instance. Leverage is e^{-b} in normal operation; a
// corrective action fires when the drawdown S - X reaches bprime, injects
// capital up to S - a_target, and switches the dynamics to regime1 until the
// process either regains its maximum or falls to depth b (insolvency).
struct Scenario {
    RegimeParams regime0;
    RegimeParams regime1;
    double q = 0.0;              // discount rate, > 0
    double b = 0.0;              // absorption depth, > 0
    double a_target = 0.0;       // post-infusion drawdown, in [0, b)
    double bprime = 0.0;         // trigger level, in [0, b]
    double run_rate = 0.0;       // running cost per unit time under supervision
    double penalty_coeff = 0.0;  // insolvency cost scale

    void validate() const {
        regime0.validate();
        regime1.validate();
        if (!(std::isfinite(q) && q > 0.0))
            throw std::invalid_argument("Scenario: q must be > 0");
        if (!(std::isfinite(b) && b > 0.0))
            throw std::invalid_argument("Scenario: b must be > 0");
        if (!(a_target >= 0.0 && a_target < b))
            throw std::invalid_argument("Scenario: a_target must lie in [0, b)");
        if (!(bprime >= 0.0 && bprime <= b))
            throw std::invalid_argument("Scenario: bprime must lie in [0, b]");
        if (!(run_rate >= 0.0))
            throw std::invalid_argument("Scenario: run_rate must be >= 0");
        if (!(penalty_coeff >= 0.0))
            throw std::invalid_argument("Scenario: penalty_coeff must be >= 0");
    }
};

struct StatePair {
    double x = 0.0;  // current log-asset
    double s = 0.0;  // running maximum, s >= x
};

/// A diagonal cost m |-> coeff_exp * e^m + coeff_const. Costs started from
/// the running maximum have exactly this form, which the multi-round
/// recursion preserves.
struct ExpAffine {
    double coeff_exp = 0.0;
    double coeff_const = 0.0;
    double eval(double m) const { return coeff_exp * std::exp(m) + coeff_const; }
};

struct CostBreakdown {
    double initial = 0.0;
    double running = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

// Evaluator for the expected discounted cost of corrective actions under a
// fixed Scenario. Scale functions are solved once at construction; every
// method is a pure function of its arguments, so instances may be shared
// across threads.
class CostModel {
public:
    explicit CostModel(const Scenario& scn)
        : CostModel(scn, build_scale(scn.regime0, scn.q), build_scale(scn.regime1, scn.q)) {}

    // Reuses already-built scale functions (they do not depend on bprime),
    // which keeps trigger-level sweeps cheap.
    CostModel(const Scenario& scn, ScaleFunction sf0, ScaleFunction sf1)
        : scn_(scn), sf0_(std::move(sf0)), sf1_(std::move(sf1)) {
        scn_.validate();
        const double wb = sf1_.w(scn_.b);
        p_up_ = sf1_.w(scn_.b - scn_.a_target) / wb;
        p_down_ = sf1_.z(scn_.b - scn_.a_target) - sf1_.z(scn_.b) * p_up_;
        run_const_ = scn_.run_rate / scn_.q *
                     (1.0 - sf1_.z(scn_.b - scn_.a_target) - (1.0 - sf1_.z(scn_.b)) * p_up_);
        if (scn_.bprime > 0.0) {
            tk_ = trigger_kernels(sf0_, scn_.bprime);
            jump_exp_ = integrate([this](double y) { return kern(y) * h_int_exp(y); },
                                  0.0, scn_.bprime);
            jump_mass_ = integrate([this](double y) { return kern(y) * h_int_mass(y); },
                                   0.0, scn_.bprime);
        }
    }

    const Scenario& scenario() const { return scn_; }
    const ScaleFunction& scale0() const { return sf0_; }
    const ScaleFunction& scale1() const { return sf1_; }
    const TriggerKernels& kernels() const {
        if (!tk_) throw std::domain_error("CostModel: trigger kernels need bprime > 0");
        return *tk_;
    }

    /// Discounted probability weights of the supervised phase: up-exit
    /// (recovery), down-exit (insolvency), and the running-cost constant.
    double recovery_weight() const { return p_up_; }
    double insolvency_weight() const { return p_down_; }
    double running_constant() const { return run_const_; }

    /// Cost when the action fires immediately (s - x >= bprime). The
    /// boundary check tolerates roundoff in states assembled as s - bprime.
    CostBreakdown cost_c0(StatePair st) const {
        require_state(st);
        if (st.s - st.x < scn_.bprime - 1e-9 * (1.0 + scn_.bprime))
            throw std::invalid_argument("cost_c0: needs s - x >= bprime");
        CostBreakdown out;
        out.initial = std::exp(st.s - scn_.a_target) - std::exp(st.x);
        out.running = run_const_;
        out.penalty = scn_.penalty_coeff * std::exp(st.s - scn_.b) * p_down_;
        out.total = out.initial + out.running + out.penalty;
        return out;
    }

    /// Coefficients (P(u), Q) with cost_c0 at (m - u, m) equal to
    /// P(u) e^m + Q for every m.
    ExpAffine diag_c0_coeffs(double u) const {
        if (!(u >= scn_.bprime && u < scn_.b))
            throw std::domain_error("diag_c0_coeffs: u must lie in [bprime, b)");
        return unchecked_c0_coeffs(u);
    }

    /// Coefficients (A1, B1) of the first-action cost started on the
    /// diagonal, C1(s, s) = A1 e^s + B1. Finite only when decay > 1.
    ExpAffine cost_c1_diag() const {
        const TriggerKernels& k = kernels();
        require_convergent(k);
        const double A = (k.creep_coeff * unchecked_c0_coeffs(scn_.bprime).coeff_exp + jump_exp_) /
                         (k.decay - 1.0);
        const double B = (k.creep_coeff + jump_mass_) * run_const_ / k.decay;
        return ExpAffine{A, B};
    }

    /// Cost from a shallow drawdown, 0 < s - x < bprime: either the maximum
    /// is regained first (then the diagonal cost applies) or the trigger is
    /// reached first, by creeping or by a jump.
    double cost_c2(StatePair st) const {
        require_state(st);
        const double d = st.s - st.x;
        if (!(d > 0.0 && d < scn_.bprime))
            throw std::invalid_argument("cost_c2: needs s - x in (0, bprime)");
        const auto g = c2_geometry(d);
        const double es = std::exp(st.s);
        const double jump = integrate(
            [&, this](double y) {
                return c2_kern(y, d, g.ratio) * (es * h_int_exp(y) + run_const_ * h_int_mass(y));
            },
            0.0, d, 1e-10, 1e-9) +
            integrate(
            [&, this](double y) {
                return c2_kern(y, d, g.ratio) * (es * h_int_exp(y) + run_const_ * h_int_mass(y));
            },
            d, scn_.bprime, 1e-10, 1e-9);
        const ExpAffine c1 = cost_c1_diag();
        return g.creep * unchecked_c0_coeffs(scn_.bprime).eval(st.s) + jump + g.ratio * c1.eval(st.s);
    }

    /// First-action cost, dispatching on the starting drawdown. The boundary
    /// s - x = bprime belongs to the immediate-action branch.
    double cost_first(StatePair st) const {
        require_state(st);
        const double d = st.s - st.x;
        if (d >= scn_.bprime) return cost_c0(st).total;
        if (d == 0.0) return cost_c1_diag().eval(st.s);
        return cost_c2(st);
    }

    /// One round of the multi-action recursion on diagonal coefficients:
    /// C_{n+1}(s,s) = p_up * K * [A_n e^s/(decay-1) + B_n/decay].
    ExpAffine recursion_step(const ExpAffine& cn) const {
        const TriggerKernels& k = kernels();
        require_convergent(k);
        const double K = k.creep_coeff + jump_mass_;
        return ExpAffine{p_up_ * K * cn.coeff_exp / (k.decay - 1.0),
                         p_up_ * K * cn.coeff_const / k.decay};
    }

    /// Per-coordinate geometric factors of the recursion; the series of
    /// diagonal costs converges iff the larger one is below 1.
    double recursion_factor_exp() const {
        const TriggerKernels& k = kernels();
        require_convergent(k);
        return p_up_ * (k.creep_coeff + jump_mass_) / (k.decay - 1.0);
    }
    double recursion_factor_const() const {
        const TriggerKernels& k = kernels();
        require_convergent(k);
        return p_up_ * (k.creep_coeff + jump_mass_) / k.decay;
    }

    /// Expected discounted cost of the n-th corrective action (n >= 1).
    double cost_n(StatePair st, int n) const {
        require_state(st);
        if (n < 1) throw std::invalid_argument("cost_n: n must be >= 1");
        if (n == 1) return cost_first(st);
        kernels();  // later rounds need a positive trigger level
        const double d = st.s - st.x;
        if (d == 0.0) return diag_chain(n).eval(st.s);
        const double prev = p_up_ * diag_chain(n - 1).eval(st.s);
        if (d >= scn_.bprime) return prev;
        // shallow start: by the time the n-th action is reached, position no
        // longer matters beyond the three first-passage weights
        const auto g = c2_geometry(d);
        const double jmass = integrate(
            [&, this](double y) { return c2_kern(y, d, g.ratio) * h_int_mass(y); },
            0.0, d, 1e-10, 1e-9) +
            integrate(
            [&, this](double y) { return c2_kern(y, d, g.ratio) * h_int_mass(y); },
            d, scn_.bprime, 1e-10, 1e-9);
        return (g.creep + jmass) * prev + g.ratio * diag_chain(n).eval(st.s);
    }

    /// Total expected discounted cost over all corrective actions, summed in
    /// closed form. Requires the recursion factors to be below 1.
    double total_cost(StatePair st) const {
        require_state(st);
        const ExpAffine s1 = diag_series_sum();   // sum_{n>=1} C_n(s,s)
        const double d = st.s - st.x;
        if (d == 0.0) return s1.eval(st.s);
        if (d >= scn_.bprime) return cost_c0(st).total + p_up_ * s1.eval(st.s);
        const double rA = recursion_factor_exp();
        const double rB = recursion_factor_const();
        const ExpAffine s2{rA * s1.coeff_exp, rB * s1.coeff_const};  // n >= 2
        const auto g = c2_geometry(d);
        const double jmass = integrate(
            [&, this](double y) { return c2_kern(y, d, g.ratio) * h_int_mass(y); },
            0.0, d, 1e-10, 1e-9) +
            integrate(
            [&, this](double y) { return c2_kern(y, d, g.ratio) * h_int_mass(y); },
            d, scn_.bprime, 1e-10, 1e-9);
        return cost_c2(st) + (g.creep + jmass) * p_up_ * s1.eval(st.s) + g.ratio * s2.eval(st.s);
    }

    /// Plain truncated summation of cost_n; retained for validating the
    /// closed form.
    double total_cost_truncated(StatePair st, int n_terms) const {
        double acc = 0.0;
        for (int n = 1; n <= n_terms; ++n) acc += cost_n(st, n);
        return acc;
    }

private:
    struct C2Geometry {
        double creep;  // sigma0^2/2 (W0'(b'-d) - k W0(b'-d))
        double ratio;  // W0(b'-d)/W0(b')
    };

    static void require_state(StatePair st) {
        if (!(st.s >= st.x)) throw std::invalid_argument("StatePair: requires s >= x");
    }
    void require_convergent(const TriggerKernels& k) const {
        if (!(k.decay > 1.0))
            throw divergence_error(
                "expected cost is infinite: W0'(bprime)/W0(bprime) <= 1");
    }

    ExpAffine unchecked_c0_coeffs(double u) const {
        return ExpAffine{std::exp(-scn_.a_target) - std::exp(-u) +
                             scn_.penalty_coeff * std::exp(-scn_.b) * p_down_,
                         run_const_};
    }

    double kern(double y) const { return sf0_.w(y, 1) - tk_->decay * sf0_.w(y); }

    C2Geometry c2_geometry(double d) const {
        const TriggerKernels& k = kernels();
        require_convergent(k);
        const double s2h = 0.5 * scn_.regime0.sigma * scn_.regime0.sigma;
        const double rem = scn_.bprime - d;
        return C2Geometry{s2h * (sf0_.w(rem, 1) - k.decay * sf0_.w(rem)),
                          sf0_.w(rem) / sf0_.w(scn_.bprime)};
    }
    double c2_kern(double y, double d, double ratio) const {
        return ratio * sf0_.w(y) - sf0_.w(y - d);
    }

    // Jump-size integrals over the window h in (y - b, y - bprime), with
    // Pi(dh) = a0 rho0 e^{rho0 h} dh on h < 0:
    //   h_int_mass = integral of Pi(dh)
    //   h_int_exp  = integral of Pi(dh) P(y - h), the e^m coefficient of the
    //                immediate-action cost after the jump
    double h_int_mass(double y) const {
        const double rho = scn_.regime0.jump_rate;
        return scn_.regime0.jump_intensity *
               (std::exp(rho * (y - scn_.bprime)) - std::exp(rho * (y - scn_.b)));
    }
    double h_int_exp(double y) const {
        const double rho = scn_.regime0.jump_rate;
        const double a0 = scn_.regime0.jump_intensity;
        const double p_const = std::exp(-scn_.a_target) +
                               scn_.penalty_coeff * std::exp(-scn_.b) * p_down_;
        const double j1 = a0 * rho / (rho + 1.0) *
                          (std::exp((rho + 1.0) * (y - scn_.bprime)) -
                           std::exp((rho + 1.0) * (y - scn_.b)));
        return p_const * h_int_mass(y) - std::exp(-y) * j1;
    }

    /// Coefficients of C_n on the diagonal (n >= 1).
    ExpAffine diag_chain(int n) const {
        ExpAffine c = cost_c1_diag();
        for (int i = 1; i < n; ++i) c = recursion_step(c);
        return c;
    }

    ExpAffine diag_series_sum() const {
        const ExpAffine c1 = cost_c1_diag();
        const double rA = recursion_factor_exp();
        const double rB = recursion_factor_const();
        if (!(std::max(rA, rB) < 1.0))
            throw divergence_error(
                "total cost series diverges: recursion factor >= 1");
        return ExpAffine{c1.coeff_exp / (1.0 - rA), c1.coeff_const / (1.0 - rB)};
    }

    Scenario scn_;
    ScaleFunction sf0_, sf1_;
    std::optional<TriggerKernels> tk_;
    double p_up_ = 0.0, p_down_ = 0.0, run_const_ = 0.0;
    double jump_exp_ = 0.0, jump_mass_ = 0.0;
};

inline CostBreakdown cost_c0(const Scenario& scn, StatePair st) {
    return CostModel(scn).cost_c0(st);
}
inline ExpAffine diag_c0_coeffs(const Scenario& scn, double u) {
    return CostModel(scn).diag_c0_coeffs(u);
}
inline ExpAffine cost_c1_diag(const Scenario& scn) {
    return CostModel(scn).cost_c1_diag();
}
inline double cost_c2(const Scenario& scn, StatePair st) {
    return CostModel(scn).cost_c2(st);
}
inline double cost_first(const Scenario& scn, StatePair st) {
    return CostModel(scn).cost_first(st);
}
inline ExpAffine recursion_step(const Scenario& scn, const ExpAffine& cn) {
    return CostModel(scn).recursion_step(cn);
}
inline double cost_n(const Scenario& scn, StatePair st, int n) {
    return CostModel(scn).cost_n(st, n);
}
inline double total_cost(const Scenario& scn, StatePair st) {
    return CostModel(scn).total_cost(st);
}

}  // namespace pcax
