#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcax/csv.hpp"
#include "pcax/mc.hpp"
#include "pcax/optimize.hpp"
#include "pcax/scenario.hpp"

namespace pcax {

// Command-line front end. Exit status: 0 on success, 2 on any validation or
// usage error, 3 when every requested value is divergent but a finite answer
// was required.

namespace cli_detail {

inline std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(detail::parse_number(detail::trim(item), "value list"));
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

inline void emit(const CsvTable& t, const std::string& out_path) {
    if (out_path.empty()) {
        t.write(std::cout);
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot open output file: " + out_path);
    t.write(os);
}

// initial/running/penalty decomposition of any branch of the first-action
// cost, obtained from its linearity in run_rate and penalty_coeff
inline CostBreakdown breakdown_first(const Scenario& scn, StatePair st) {
    Scenario s0 = scn;
    s0.run_rate = 0.0;
    s0.penalty_coeff = 0.0;
    Scenario s1 = scn;
    s1.penalty_coeff = 0.0;
    CostBreakdown out;
    out.initial = CostModel(s0).cost_first(st);
    out.total = CostModel(scn).cost_first(st);
    out.running = CostModel(s1).cost_first(st) - out.initial;
    out.penalty = out.total - out.initial - out.running;
    return out;
}

}  // namespace cli_detail

inline int run_command(const std::vector<std::string>& args) {
    CLI::App app{"excursion-triggered corrective-action cost toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, points_csv, param_name, values_csv;
    int regime = 0;
    double x = 0.0, s = 0.0, bprime = -1.0, lo = -1.0, hi = -1.0, dt = 1e-3, horizon = 0.0;
    int steps = -1, rounds = 1, threads = 0;
    std::int64_t paths = 10000;
    std::uint64_t seed = 1;
    bool law = false;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--scenario", scenario_path, "scenario file")->required();
        c->add_option("--out", out_path, "write CSV here instead of stdout");
    };

    CLI::App* c_scale = app.add_subcommand("scale", "evaluate W, W', W'', Z at points");
    add_common(c_scale);
    c_scale->add_option("--regime", regime, "0 or 1")->check(CLI::Range(0, 1));
    c_scale->add_option("--points", points_csv, "comma-separated x values")->required();

    CLI::App* c_cost = app.add_subcommand("cost", "first-action cost with breakdown");
    add_common(c_cost);
    c_cost->add_option("--bprime", bprime, "trigger level")->required();
    c_cost->add_option("--x", x, "log-asset position (default 0)");
    c_cost->add_option("--s", s, "running maximum (default 0)");

    CLI::App* c_sweep = app.add_subcommand("sweep", "cost at the origin on a trigger grid");
    add_common(c_sweep);
    c_sweep->add_option("--lo", lo, "grid start");
    c_sweep->add_option("--hi", hi, "grid end");
    c_sweep->add_option("--steps", steps, "grid size");

    CLI::App* c_opt = app.add_subcommand("optimize", "cost-minimizing trigger level");
    add_common(c_opt);
    c_opt->add_option("--lo", lo, "domain lower edge");
    c_opt->add_option("--hi", hi, "domain upper edge");

    CLI::App* c_stat = app.add_subcommand("statics", "re-optimize along a parameter sweep");
    add_common(c_stat);
    c_stat->add_option("--param", param_name, "sigma1, mu1 or a_target")->required();
    c_stat->add_option("--values", values_csv, "comma-separated parameter values")->required();

    CLI::App* c_mc = app.add_subcommand("mc", "Monte Carlo path oracle");
    add_common(c_mc);
    c_mc->add_option("--bprime", bprime, "trigger level")->required();
    c_mc->add_option("--x", x, "start log-asset (default 0)");
    c_mc->add_option("--s", s, "start maximum (default 0)");
    c_mc->add_option("--paths", paths, "number of paths");
    c_mc->add_option("--dt", dt, "Euler step");
    c_mc->add_option("--seed", seed, "RNG seed");
    c_mc->add_option("--rounds", rounds, "maximum corrective actions per path");
    c_mc->add_option("--horizon", horizon, "time cap (default 14/q)");
    c_mc->add_option("--threads", threads, "worker threads (default hardware)");
    c_mc->add_flag("--law", law, "estimate the trigger law instead of the cost");

    CLI::App* c_crit = app.add_subcommand("critical", "trigger level where costs turn infinite");
    add_common(c_crit);

    std::vector<const char*> argv;
    argv.push_back("pcax");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const ScenarioFile sf = load_scenario(scenario_path);
        Scenario scn = sf.scenario;
        CsvTable t;

        if (*c_scale) {
            const auto pts = cli_detail::parse_list(points_csv);
            const RegimeParams& r = regime == 0 ? scn.regime0 : scn.regime1;
            const ScaleFunction w = build_scale(r, scn.q);
            t.header = {"x", "w", "w1", "w2", "z"};
            for (double p : pts)
                t.add_row() = {csv_num(p), csv_num(w.w(p)), csv_num(w.w(p, 1)),
                               csv_num(w.w(p, 2)), csv_num(w.z(p))};
        } else if (*c_cost) {
            scn.bprime = bprime;
            const StatePair st{x, s};
            const double d = s - x;
            const char* branch = d >= bprime ? "immediate" : (d == 0.0 ? "diagonal" : "shallow");
            const CostBreakdown cb = cli_detail::breakdown_first(scn, st);
            t.header = {"x", "s", "bprime", "branch", "initial", "running", "penalty", "total"};
            t.add_row() = {csv_num(x), csv_num(s), csv_num(bprime), branch,
                           csv_num(cb.initial), csv_num(cb.running), csv_num(cb.penalty),
                           csv_num(cb.total)};
        } else if (*c_sweep) {
            const double glo = lo >= 0 ? lo : sf.optimize.lo.value_or(-1.0);
            const double ghi = hi >= 0 ? hi : sf.optimize.hi.value_or(-1.0);
            const int gsteps = steps > 0 ? steps : sf.optimize.steps;
            if (glo < 0 || ghi < 0)
                throw std::invalid_argument(
                    "sweep: need --lo/--hi or an [optimize] section in the scenario file");
            t.header = {"bprime", "cost"};
            for (const SweepRow& r : sweep_bprime(scn, glo, ghi, gsteps))
                t.add_row() = {csv_num(r.bprime), csv_num(r.cost)};
        } else if (*c_opt) {
            std::optional<std::pair<double, double>> domain;
            const std::optional<double> dlo = lo >= 0 ? std::optional<double>(lo) : sf.optimize.lo;
            const std::optional<double> dhi = hi >= 0 ? std::optional<double>(hi) : sf.optimize.hi;
            if (dlo && dhi) domain = std::make_pair(*dlo, *dhi);
            else if (dlo || dhi)
                throw std::invalid_argument("optimize: give both --lo and --hi or neither");
            const Optimum o = optimize_bprime(scn, domain);
            t.header = {"bstar", "cost", "boundary"};
            t.add_row() = {csv_num(o.bstar), csv_num(o.cost_at_bstar), o.boundary ? "1" : "0"};
        } else if (*c_stat) {
            const auto rows =
                comparative_statics(scn, parse_statics_param(param_name),
                                    cli_detail::parse_list(values_csv));
            t.header = {param_name, "bstar", "cost", "boundary"};
            for (const StaticsRow& r : rows)
                t.add_row() = {csv_num(r.value), csv_num(r.opt.bstar),
                               csv_num(r.opt.cost_at_bstar), r.opt.boundary ? "1" : "0"};
        } else if (*c_mc) {
            scn.bprime = bprime;
            SimConfig cfg;
            cfg.n_paths = paths;
            cfg.dt = dt;
            cfg.seed = seed;
            cfg.horizon = horizon;
            cfg.max_pca_rounds = rounds;
            cfg.start_x = x;
            cfg.start_s = s;
            cfg.threads = threads;
            if (law) {
                const TriggerLawResult r = estimate_trigger_law(scn, cfg);
                t.header = {"creep_mass", "creep_se", "jump_mass", "jump_se",
                            "overshoot_mass", "none_fraction", "decay_rate", "n"};
                t.add_row() = {csv_num(r.creep_mass.mean), csv_num(r.creep_mass.std_error),
                               csv_num(r.jump_mass.mean), csv_num(r.jump_mass.std_error),
                               csv_num(r.overshoot_mass), csv_num(r.none_fraction),
                               csv_num(r.decay_rate), std::to_string(r.n)};
            } else {
                const McCostResult r = estimate_cost(scn, cfg);
                t.header = {"mean", "stderr", "n", "initial", "running",
                            "penalty", "mean_rounds", "horizon_flagged"};
                t.add_row() = {csv_num(r.total.mean), csv_num(r.total.std_error),
                               std::to_string(r.total.n), csv_num(r.mean_initial),
                               csv_num(r.mean_running), csv_num(r.mean_penalty),
                               csv_num(r.mean_rounds), std::to_string(r.horizon_flagged)};
            }
        } else if (*c_crit) {
            const auto crit = critical_bprime(build_scale(scn.regime0, scn.q));
            t.header = {"critical_bprime"};
            t.add_row() = {crit ? csv_num(*crit) : "inf"};
        }

        cli_detail::emit(t, out_path);
        return 0;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace pcax
