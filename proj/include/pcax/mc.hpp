#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "pcax/cost.hpp"
#include "pcax/rng.hpp"

namespace pcax {

// Path-simulation settings. Every estimate is a deterministic function of
// (scenario, config): paths use independent substreams keyed by
// (seed, path index) and partial sums are combined in fixed chunk order, so
// results do not depend on the thread count.
struct SimConfig {
    std::int64_t n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    double horizon = 0.0;  // <= 0 selects 14/q, i.e. e^{-q H} < 1e-6
    int max_pca_rounds = 1;
    double start_x = 0.0;
    double start_s = 0.0;
    int threads = 0;  // <= 0 selects the hardware thread count

    double effective_horizon(double q) const { return horizon > 0.0 ? horizon : 14.0 / q; }

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
        if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
        if (max_pca_rounds < 1)
            throw std::invalid_argument("SimConfig: max_pca_rounds must be >= 1");
        if (!(start_s >= start_x))
            throw std::invalid_argument("SimConfig: start state needs s >= x");
    }
};

enum class TriggerType { none, creep, jump, overshoot_past_b };

struct PathOutcome {
    double initial = 0.0;
    double running = 0.0;
    double penalty = 0.0;
    int rounds = 0;
    TriggerType first_trigger = TriggerType::none;
    bool horizon_hit = false;

    double total() const { return initial + running + penalty; }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

namespace detail {

struct StepConsts {
    double dt = 0.0;
    std::int64_t horizon_steps = 0;
    double drift0 = 0.0, diff0 = 0.0;  // per-step drift and diffusion scale
    double drift1 = 0.0, diff1 = 0.0;

    StepConsts(const Scenario& scn, const SimConfig& cfg) {
        dt = cfg.dt;
        horizon_steps =
            static_cast<std::int64_t>(std::ceil(cfg.effective_horizon(scn.q) / dt));
        const double sq = std::sqrt(dt);
        drift0 = scn.regime0.mu * dt;
        diff0 = scn.regime0.sigma * sq;
        drift1 = scn.regime1.mu * dt;
        diff1 = scn.regime1.sigma * sq;
    }
};

struct TriggerEvent {
    TriggerType type = TriggerType::none;
    double time = 0.0;
    double max_minus_s = 0.0;  // S_T - s, growth of the maximum by trigger time
};

// Walks regime 0 from (x, s) until the drawdown first reaches bprime or the
// step horizon runs out. Euler diffusion with exact exponential jump clocks;
// a crossing step that contains a jump is a jump trigger, otherwise creep.
inline TriggerEvent walk_to_trigger(const Scenario& scn, const StepConsts& sc,
                                    Rng& rng, double& x, double& s,
                                    std::int64_t& step) {
    const double a0 = scn.regime0.jump_intensity;
    const double rho0 = scn.regime0.jump_rate;
    const double s0 = s;
    double next_jump = step * sc.dt + rng.exponential(a0);
    while (step < sc.horizon_steps) {
        ++step;
        const double t = step * sc.dt;
        x += sc.drift0 + sc.diff0 * rng.normal();
        bool jumped = false;
        while (next_jump <= t) {
            x -= rng.exponential(rho0);
            next_jump += rng.exponential(a0);
            jumped = true;
        }
        if (x > s) s = x;
        const double dd = s - x;
        if (dd >= scn.bprime) {
            TriggerEvent ev;
            ev.time = t;
            ev.max_minus_s = s - s0;
            ev.type = dd >= scn.b ? TriggerType::overshoot_past_b
                                  : (jumped ? TriggerType::jump : TriggerType::creep);
            return ev;
        }
    }
    return TriggerEvent{};
}

}  // namespace detail

/// Simulates one path of the switching model and returns its discounted
/// costs. Deterministic in (scenario, config, path_index).
inline PathOutcome simulate_path(const Scenario& scn, const SimConfig& cfg,
                                 std::uint64_t path_index) {
    scn.validate();
    cfg.validate();
    const detail::StepConsts sc(scn, cfg);
    Rng rng(cfg.seed, path_index);

    PathOutcome out;
    double x = cfg.start_x, s = cfg.start_s;
    std::int64_t step = 0;

    for (;;) {
        const auto ev = detail::walk_to_trigger(scn, sc, rng, x, s, step);
        if (ev.type == TriggerType::none) {
            out.horizon_hit = true;
            return out;
        }
        if (out.rounds == 0) out.first_trigger = ev.type;
        if (ev.type == TriggerType::overshoot_past_b) return out;  // absorbed, no action

        // corrective action: infuse up to s - a_target, switch to regime 1
        const double t_entry = step * sc.dt;
        out.initial += std::exp(-scn.q * t_entry) * (std::exp(s - scn.a_target) - std::exp(x));
        out.rounds += 1;
        x = s - scn.a_target;
        const double down = s - scn.b;
        const double a1 = scn.regime1.jump_intensity;
        const double rho1 = scn.regime1.jump_rate;
        double next_jump = t_entry + rng.exponential(a1);
        for (;;) {
            if (step >= sc.horizon_steps) {
                out.running += scn.run_rate *
                               (std::exp(-scn.q * t_entry) - std::exp(-scn.q * step * sc.dt)) /
                               scn.q;
                out.horizon_hit = true;
                return out;
            }
            ++step;
            const double t = step * sc.dt;
            x += sc.drift1 + sc.diff1 * rng.normal();
            while (next_jump <= t) {
                x -= rng.exponential(rho1);
                next_jump += rng.exponential(a1);
            }
            if (x <= down) {  // insolvent
                out.running += scn.run_rate *
                               (std::exp(-scn.q * t_entry) - std::exp(-scn.q * t)) / scn.q;
                out.penalty +=
                    scn.penalty_coeff * std::exp(-scn.q * t) * std::exp(s - scn.b);
                return out;
            }
            if (x >= s) {  // leverage restored, action ends
                out.running += scn.run_rate *
                               (std::exp(-scn.q * t_entry) - std::exp(-scn.q * t)) / scn.q;
                x = s;
                break;
            }
        }
        if (out.rounds >= cfg.max_pca_rounds) return out;
    }
}

namespace detail {

template <class Fn>
void run_chunked(std::int64_t n, int threads, std::int64_t chunk_size, Fn&& fn) {
    const std::int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
    int nt = threads > 0 ? threads
                         : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::max<std::int64_t>(1, std::min<std::int64_t>(nt, n_chunks));
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt - 1);
    for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct McCostResult {
    McEstimate total;
    double mean_initial = 0.0;
    double mean_running = 0.0;
    double mean_penalty = 0.0;
    double mean_rounds = 0.0;
    std::int64_t horizon_flagged = 0;
};

/// Sample mean and standard error of the discounted path cost over
/// cfg.n_paths independent paths.
inline McCostResult estimate_cost(const Scenario& scn, const SimConfig& cfg) {
    scn.validate();
    cfg.validate();
    struct Sums {
        double tot = 0, tot2 = 0, init = 0, run = 0, pen = 0, rounds = 0;
        std::int64_t horizon = 0;
    };
    constexpr std::int64_t kChunk = 1024;
    std::vector<Sums> sums((cfg.n_paths + kChunk - 1) / kChunk);
    detail::run_chunked(cfg.n_paths, cfg.threads, kChunk,
                        [&](std::int64_t c, std::int64_t b, std::int64_t e) {
                            Sums acc;
                            for (std::int64_t i = b; i < e; ++i) {
                                const PathOutcome p = simulate_path(scn, cfg, i);
                                const double t = p.total();
                                acc.tot += t;
                                acc.tot2 += t * t;
                                acc.init += p.initial;
                                acc.run += p.running;
                                acc.pen += p.penalty;
                                acc.rounds += p.rounds;
                                acc.horizon += p.horizon_hit ? 1 : 0;
                            }
                            sums[c] = acc;
                        });
    Sums all;
    for (const Sums& s : sums) {
        all.tot += s.tot;
        all.tot2 += s.tot2;
        all.init += s.init;
        all.run += s.run;
        all.pen += s.pen;
        all.rounds += s.rounds;
        all.horizon += s.horizon;
    }
    const double n = static_cast<double>(cfg.n_paths);
    McCostResult r;
    r.total.n = cfg.n_paths;
    r.total.mean = all.tot / n;
    if (cfg.n_paths > 1) {
        const double var = std::max(0.0, (all.tot2 - all.tot * all.tot / n) / (n - 1.0));
        r.total.std_error = std::sqrt(var / n);
    }
    r.mean_initial = all.init / n;
    r.mean_running = all.run / n;
    r.mean_penalty = all.pen / n;
    r.mean_rounds = all.rounds / n;
    r.horizon_flagged = all.horizon;
    return r;
}

struct TriggerLawResult {
    McEstimate creep_mass;     // mean of e^{-qT} over creeping triggers
    McEstimate jump_mass;      // mean of e^{-qT} over jump triggers (window only)
    double overshoot_mass = 0.0;  // e^{-qT}-weighted, jumps past depth b
    double none_fraction = 0.0;   // paths that never triggered within horizon
    double decay_rate = 0.0;      // fitted exponential rate of S_T - s
    std::int64_t n = 0;
};

/// Empirical discounted trigger law: e^{-qT}-weighted masses by crossing
/// type, and the decay rate of the maximum at the trigger time fitted by
/// least squares on the log of a weighted histogram. Overshoots past depth b
/// are excluded from both masses and from the histogram.
inline TriggerLawResult estimate_trigger_law(const Scenario& scn, const SimConfig& cfg) {
    scn.validate();
    cfg.validate();
    if (!(scn.bprime > 0.0))
        throw std::domain_error("estimate_trigger_law: bprime must be > 0");
    struct ChunkOut {
        double creep = 0, creep2 = 0, jump = 0, jump2 = 0, over = 0;
        std::int64_t none = 0;
        std::vector<std::pair<double, double>> mw;  // (S_T - s, e^{-qT})
    };
    constexpr std::int64_t kChunk = 1024;
    std::vector<ChunkOut> outs((cfg.n_paths + kChunk - 1) / kChunk);
    detail::run_chunked(
        cfg.n_paths, cfg.threads, kChunk,
        [&](std::int64_t c, std::int64_t b, std::int64_t e) {
            ChunkOut acc;
            const detail::StepConsts sc(scn, cfg);
            for (std::int64_t i = b; i < e; ++i) {
                Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
                double x = cfg.start_x, s = cfg.start_s;
                std::int64_t step = 0;
                const auto ev = detail::walk_to_trigger(scn, sc, rng, x, s, step);
                if (ev.type == TriggerType::none) {
                    ++acc.none;
                    continue;
                }
                const double w = std::exp(-scn.q * ev.time);
                switch (ev.type) {
                    case TriggerType::creep:
                        acc.creep += w;
                        acc.creep2 += w * w;
                        acc.mw.emplace_back(ev.max_minus_s, w);
                        break;
                    case TriggerType::jump:
                        acc.jump += w;
                        acc.jump2 += w * w;
                        acc.mw.emplace_back(ev.max_minus_s, w);
                        break;
                    default:
                        acc.over += w;
                }
            }
            outs[c] = std::move(acc);
        });

    double creep = 0, creep2 = 0, jump = 0, jump2 = 0, over = 0;
    std::int64_t none = 0;
    std::vector<std::pair<double, double>> mw;
    for (auto& o : outs) {
        creep += o.creep;
        creep2 += o.creep2;
        jump += o.jump;
        jump2 += o.jump2;
        over += o.over;
        none += o.none;
        mw.insert(mw.end(), o.mw.begin(), o.mw.end());
    }
    const double n = static_cast<double>(cfg.n_paths);
    TriggerLawResult r;
    r.n = cfg.n_paths;
    auto make_est = [&](double sum, double sum2) {
        McEstimate e;
        e.n = cfg.n_paths;
        e.mean = sum / n;
        if (cfg.n_paths > 1)
            e.std_error = std::sqrt(
                std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0)) / n);
        return e;
    };
    r.creep_mass = make_est(creep, creep2);
    r.jump_mass = make_est(jump, jump2);
    r.overshoot_mass = over / n;
    r.none_fraction = static_cast<double>(none) / n;

    // exponential-rate fit: weighted histogram of S_T - s, least squares on
    // log bin mass against bin centers, bins weighted by their mass
    double wsum = 0, wu = 0;
    for (const auto& [u, w] : mw) {
        wsum += w;
        wu += w * u;
    }
    if (wsum > 0 && mw.size() > 100) {
        const double u_max = 6.0 * (wu / wsum);
        constexpr int kBins = 40;
        double mass[kBins] = {};
        for (const auto& [u, w] : mw) {
            if (u >= u_max) continue;
            mass[static_cast<int>(u / u_max * kBins)] += w;
        }
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int j = 0; j < kBins; ++j) {
            if (mass[j] <= 1e-6 * wsum) continue;
            const double xc = (j + 0.5) * u_max / kBins;
            const double yl = std::log(mass[j]);
            const double wj = mass[j];
            sw += wj;
            sx += wj * xc;
            sy += wj * yl;
            sxx += wj * xc * xc;
            sxy += wj * xc * yl;
        }
        const double den = sw * sxx - sx * sx;
        if (den > 0) r.decay_rate = -(sw * sxy - sx * sy) / den;
    }
    return r;
}

}  // namespace pcax
