#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pcax/fluctuation.hpp"
#include "pcax/mc.hpp"
#include "pcax/quadrature.hpp"
#include "mc_exit_oracle.hpp"
#include "test_util.hpp"

using namespace pcax;
using Catch::Approx;
using testutil::paper_scenario;

TEST_CASE("rng: uniform, exponential and normal sanity") {
    Rng rng(20260809, 3);
    const long n = 20000000;
    double s1 = 0, s2 = 0;
    long tail2 = 0, tail3 = 0;
    for (long i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        if (std::abs(z) > 2) ++tail2;
        if (std::abs(z) > 3) ++tail3;
    }
    const double mean = s1 / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
    const double p2 = std::erfc(2 / std::sqrt(2.0)), p3 = std::erfc(3 / std::sqrt(2.0));
    CHECK(std::abs(double(tail2) / n - p2) < 5.0 * std::sqrt(p2 / n));
    CHECK(std::abs(double(tail3) / n - p3) < 5.0 * std::sqrt(p3 / n));

    double esum = 0;
    for (long i = 0; i < 1000000; ++i) {
        const double u = rng.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        esum += rng.exponential(2.0);
    }
    CHECK(esum / 1000000 == Approx(0.5).margin(5.0 * 0.5 / 1000.0));
}

TEST_CASE("rng: substreams are reproducible and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next(), vb = b.next(), vc = c.next();
        all_equal = all_equal && (va == vb);
        any_equal_c = any_equal_c || (va == vc);
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("simulate_path: outcome invariants") {
    Scenario scn = paper_scenario(0.4);
    SimConfig cfg;
    cfg.dt = 2e-3;
    cfg.seed = 5;
    cfg.max_pca_rounds = 4;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const PathOutcome p = simulate_path(scn, cfg, i);
        CHECK(p.initial >= 0.0);
        CHECK(p.running >= 0.0);
        CHECK(p.penalty >= 0.0);
        CHECK(p.total() == p.initial + p.running + p.penalty);
        CHECK(p.rounds >= 0);
        CHECK(p.rounds <= cfg.max_pca_rounds);
        if (p.rounds == 0)
            CHECK((p.first_trigger == TriggerType::none ||
                   p.first_trigger == TriggerType::overshoot_past_b));
    }
}

TEST_CASE("simulate_path: component isolation") {
    Scenario scn = paper_scenario(0.4);
    scn.run_rate = 0.0;
    scn.penalty_coeff = 0.0;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.seed = 11;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const PathOutcome p = simulate_path(scn, cfg, i);
        CHECK(p.running == 0.0);
        CHECK(p.penalty == 0.0);
        CHECK(p.total() == p.initial);
    }
}

TEST_CASE("simulate_path: monotone drift never draws down") {
    Scenario scn = paper_scenario(0.4);
    scn.regime0.jump_intensity = 1e-12;
    scn.regime0.sigma = 1e-6;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 30.0;
    cfg.seed = 2;
    const PathOutcome p = simulate_path(scn, cfg, 0);
    CHECK(p.first_trigger == TriggerType::none);
    CHECK(p.total() == 0.0);
    CHECK(p.rounds == 0);
    CHECK(p.horizon_hit);
}

TEST_CASE("estimate_cost: deterministic across repeats and thread counts") {
    const Scenario scn = paper_scenario(0.4);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt = 1e-3;
    cfg.seed = 99;
    cfg.threads = 2;
    const McCostResult a = estimate_cost(scn, cfg);
    const McCostResult b = estimate_cost(scn, cfg);
    cfg.threads = 1;
    const McCostResult c = estimate_cost(scn, cfg);
    CHECK(a.total.mean == b.total.mean);
    CHECK(a.total.std_error == b.total.std_error);
    CHECK(a.total.mean == c.total.mean);
    CHECK(a.total.std_error == c.total.std_error);
}

TEST_CASE("estimate_cost equals the average over simulate_path substreams") {
    const Scenario scn = paper_scenario(0.4);
    SimConfig cfg;
    cfg.n_paths = 300;
    cfg.dt = 2e-3;
    cfg.seed = 123;
    const McCostResult r = estimate_cost(scn, cfg);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < 300; ++i) acc += simulate_path(scn, cfg, i).total();
    CHECK(r.total.mean == Approx(acc / 300.0).epsilon(1e-12));
}

TEST_CASE("estimate_cost: standard error follows the halving law") {
    // run at a low trigger level where the second moment is finite
    Scenario scn = paper_scenario(0.2);
    {
        const ScaleFunction sf2q = build_scale(scn.regime0, 2.0 * scn.q);
        REQUIRE(sf2q.log_deriv(scn.bprime) > 2.0);
    }
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-3;
    cfg.seed = 7;
    const double se1 = estimate_cost(scn, cfg).total.std_error;
    cfg.n_paths = 40000;
    const double se2 = estimate_cost(scn, cfg).total.std_error;
    CHECK(se2 / se1 > 0.6);
    CHECK(se2 / se1 < 0.8);
}

TEST_CASE("estimate_cost: single round agrees with the first-action cost") {
    const Scenario scn = paper_scenario(0.5401);
    const double analytic = CostModel(scn).cost_first({0.0, 0.0});
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-3;
    cfg.seed = 31;
    const McCostResult r = estimate_cost(scn, cfg);
    // 0.05 covers the Euler barrier bias at this step size (see the
    // acceptance run for the tightened dt-pair version)
    CHECK(std::abs(r.total.mean - analytic) <
          3.0 * r.total.std_error + 0.05);
    CHECK(r.mean_rounds == Approx(1.0).margin(0.01));
}

TEST_CASE("estimate_cost: immediate-action start matches the closed form") {
    const Scenario scn = paper_scenario(0.5401);
    const CostBreakdown cb = CostModel(scn).cost_c0({-0.5401, 0.0});
    SimConfig cfg;
    cfg.n_paths = 40000;
    cfg.dt = 5e-4;
    cfg.seed = 17;
    cfg.start_x = -0.5401;
    cfg.start_s = 0.0;
    const McCostResult r = estimate_cost(scn, cfg);
    CHECK(std::abs(r.total.mean - cb.total) < 3.0 * r.total.std_error + 0.02);
    // component means split the same way
    CHECK(std::abs(r.mean_initial - cb.initial) < 0.002);
    CHECK(std::abs(r.mean_running - cb.running) < 3.0 * r.total.std_error + 0.02);
    CHECK(std::abs(r.mean_penalty - cb.penalty) < 0.01);
}

TEST_CASE("estimate_cost: multi-round means exceed the single round") {
    const Scenario scn = paper_scenario(0.45);
    SimConfig cfg;
    cfg.n_paths = 8000;
    cfg.dt = 1e-3;
    cfg.seed = 13;
    const double one = estimate_cost(scn, cfg).total.mean;
    cfg.max_pca_rounds = 25;
    const McCostResult multi = estimate_cost(scn, cfg);
    CHECK(multi.total.mean > one);
    CHECK(multi.mean_rounds > 1.0);
}

TEST_CASE("estimate_trigger_law: masses and decay against the kernels") {
    const Scenario scn = paper_scenario(0.5);
    const ScaleFunction sf0 = build_scale(scn.regime0, scn.q);
    const TriggerKernels tk = trigger_kernels(sf0, scn.bprime);
    const double creep_analytic = tk.creep_coeff / tk.decay;
    const double jump_analytic = integrate(
        [&](double y) {
            return (sf0.w(y, 1) - tk.decay * sf0.w(y)) * scn.regime0.jump_intensity *
                   (std::exp(scn.regime0.jump_rate * (y - scn.bprime)) -
                    std::exp(scn.regime0.jump_rate * (y - scn.b)));
        },
        0.0, scn.bprime, 1e-12, 1e-11) / tk.decay;

    SimConfig cfg;
    cfg.n_paths = 30000;
    cfg.dt = 5e-4;
    cfg.seed = 41;
    const TriggerLawResult r = estimate_trigger_law(scn, cfg);
    CHECK(r.none_fraction == 0.0);
    CHECK(std::abs(r.creep_mass.mean - creep_analytic) <
          3.0 * r.creep_mass.std_error + 0.01);
    CHECK(std::abs(r.jump_mass.mean - jump_analytic) <
          3.0 * r.jump_mass.std_error + 0.01);
    CHECK(r.overshoot_mass > 0.0);
    CHECK(r.creep_mass.mean + r.jump_mass.mean + r.overshoot_mass < 1.0);
    CHECK(r.decay_rate == Approx(tk.decay).epsilon(0.10));
    CHECK_THROWS_AS(estimate_trigger_law(paper_scenario(0.0), cfg), std::domain_error);
}

TEST_CASE("exit oracle: two-sided race and ruin match the scale identities") {
    const RegimeParams r1{0.1, 0.1, 1.0, 10.0};
    const double q = 0.1;
    const ScaleFunction sf = build_scale(r1, q);

    const auto race = testutil::mc_two_sided_exit(r1, q, 0.7, 1.0, 20000, 5e-4, 77);
    CHECK(std::abs(race.up.mean - exit_up(sf, 0.7, 1.0)) <
          3.0 * race.up.std_error + 0.005);
    CHECK(std::abs(race.down.mean - exit_down(sf, 0.7, 1.0)) <
          3.0 * race.down.std_error + 0.005);

    const auto ruin = testutil::mc_ruin(r1, q, 0.3, 10000, 5e-4, 78);
    CHECK(std::abs(ruin.mean - ruin_laplace(sf, 0.3)) <
          3.0 * ruin.std_error + 0.005);
}

TEST_CASE("SimConfig validation") {
    SimConfig cfg;
    cfg.n_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.start_x = 1.0;
    cfg.start_s = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    CHECK(cfg.effective_horizon(0.1) == Approx(140.0));
}
