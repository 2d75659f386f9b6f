#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcax/cost.hpp"

namespace pcax {

struct SweepRow {
    double bprime = 0.0;
    std::optional<double> cost;  // empty marks a divergent trigger level
};

struct Optimum {
    double bstar = 0.0;
    double cost_at_bstar = 0.0;
    bool boundary = false;  // minimizer sits on a search-domain edge
};

namespace detail {

// Shared scale functions plus the first-action cost at the origin as a
// function of the trigger level.
class BprimeObjective {
public:
    explicit BprimeObjective(const Scenario& base)
        : base_(base),
          sf0_(build_scale(base.regime0, base.q)),
          sf1_(build_scale(base.regime1, base.q)) {}

    double decay(double bprime) const { return sf0_.log_deriv(bprime); }
    std::optional<double> critical() const { return critical_bprime(sf0_); }

    double operator()(double bprime) const {
        Scenario s = base_;
        s.bprime = bprime;
        return CostModel(s, sf0_, sf1_).cost_c1_diag().eval(0.0);
    }

    const Scenario& base() const { return base_; }

private:
    Scenario base_;
    ScaleFunction sf0_, sf1_;
};

}  // namespace detail

/// First-action cost at the origin on a uniform trigger grid; levels at or
/// beyond the divergence frontier produce rows without a cost value.
inline std::vector<SweepRow> sweep_bprime(const Scenario& base, double lo, double hi,
                                          int steps) {
    if (!(lo > 0.0 && lo < hi && hi <= base.b))
        throw std::invalid_argument("sweep_bprime: need 0 < lo < hi <= b");
    if (steps < 2) throw std::invalid_argument("sweep_bprime: steps must be >= 2");
    detail::BprimeObjective f(base);
    std::vector<SweepRow> rows;
    rows.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double bp = lo + (hi - lo) * i / (steps - 1);
        if (f.decay(bp) <= 1.0)
            rows.push_back({bp, std::nullopt});
        else
            rows.push_back({bp, f(bp)});
    }
    return rows;
}

/// Minimizes the first-action cost at the origin over the trigger level:
/// 200-point grid pre-scan, then golden-section refinement of the best cell
/// to an interval below 1e-5. Deterministic. The default domain is
/// [max(a_target, 1e-4), min(b, critical) - 1e-4]; an explicit domain is
/// intersected with (0, critical).
inline Optimum optimize_bprime(const Scenario& base,
                               std::optional<std::pair<double, double>> domain = {}) {
    detail::BprimeObjective f(base);
    const std::optional<double> crit = f.critical();

    double lo, hi;
    if (domain) {
        lo = std::max(domain->first, 1e-12);
        hi = std::min(domain->second, base.b);
        if (crit) hi = std::min(hi, *crit - 1e-9);
    } else {
        lo = std::max(base.a_target, 1e-4);
        hi = std::min(base.b, crit.value_or(std::numeric_limits<double>::infinity())) - 1e-4;
    }
    if (crit && !(*crit > lo))
        throw divergence_error(
            "optimize_bprime: every trigger level in the domain has infinite cost "
            "(critical level " + std::to_string(*crit) + " <= domain lower edge)");
    if (!(lo < hi))
        throw std::invalid_argument("optimize_bprime: empty search domain");

    double best_x = lo, best_v = f(lo);
    auto consider = [&](double x, double v) {
        if (v < best_v) { best_v = v; best_x = x; }
    };
    constexpr int kGrid = 200;
    int best_i = 0;
    for (int i = 0; i < kGrid; ++i) {
        const double x = lo + (hi - lo) * i / (kGrid - 1);
        const double v = f(x);
        if (v < best_v) best_i = i;
        consider(x, v);
    }
    const double cell = (hi - lo) / (kGrid - 1);
    double a = std::max(lo, lo + (best_i - 1) * cell);
    double b = std::min(hi, lo + (best_i + 1) * cell);

    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    consider(x1, f1);
    consider(x2, f2);
    while (b - a > 1e-5) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
            consider(x1, f1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
            consider(x2, f2);
        }
    }
    const bool boundary = best_x - lo < 1e-5 || hi - best_x < 1e-5;
    return Optimum{best_x, best_v, boundary};
}

enum class StaticsParam { sigma1, mu1, a_target };

inline StaticsParam parse_statics_param(const std::string& name) {
    if (name == "sigma1") return StaticsParam::sigma1;
    if (name == "mu1") return StaticsParam::mu1;
    if (name == "a_target") return StaticsParam::a_target;
    throw std::invalid_argument("statics parameter must be sigma1, mu1 or a_target");
}

struct StaticsRow {
    double value = 0.0;
    Optimum opt;
};

/// Re-optimizes the trigger level while one parameter runs through the given
/// values, everything else held fixed.
inline std::vector<StaticsRow> comparative_statics(const Scenario& base,
                                                   StaticsParam param,
                                                   const std::vector<double>& values) {
    std::vector<StaticsRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        Scenario s = base;
        switch (param) {
            case StaticsParam::sigma1: s.regime1.sigma = v; break;
            case StaticsParam::mu1: s.regime1.mu = v; break;
            case StaticsParam::a_target: s.a_target = v; break;
        }
        rows.push_back({v, optimize_bprime(s)});
    }
    return rows;
}

}  // namespace pcax
