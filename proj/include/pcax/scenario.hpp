#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "pcax/cost.hpp"

namespace pcax {

struct scenario_parse_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Optional [optimize] section of a scenario file; lo/hi fall back to the
// model-derived default search domain when absent.
struct OptimizeSection {
    std::optional<double> lo;
    std::optional<double> hi;
    int steps = 100;
};

struct ScenarioFile {
    Scenario scenario;  // bprime is not part of the file; commands supply it
    OptimizeSection optimize;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw scenario_parse_error(where + ": not a number: '" + v + "'");
    return d;
}

}  // namespace detail

/// Parses a sectioned key-value scenario document. The grammar is strict:
/// unknown sections or keys are rejected by name, required keys must all be
/// present, duplicates are errors. Only the [optimize] section is optional.
inline ScenarioFile parse_scenario(std::istream& in, const std::string& origin) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"regime0", {"mu", "sigma", "jump_intensity", "jump_rate"}},
        {"regime1", {"mu", "sigma", "jump_intensity", "jump_rate"}},
        {"model", {"q", "b", "a_target", "run_rate", "penalty_coeff"}},
        {"optimize", {"lo", "hi", "steps"}},
    };

    std::map<std::string, std::map<std::string, std::string>> values;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw scenario_parse_error(where + ": malformed section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            if (!schema.count(section))
                throw scenario_parse_error(where + ": unknown section '" + section + "'");
            if (values.count(section))
                throw scenario_parse_error(where + ": duplicate section '" + section + "'");
            values[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw scenario_parse_error(where + ": expected 'key = value'");
        if (section.empty())
            throw scenario_parse_error(where + ": entry before any section header");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        if (!schema.at(section).count(key))
            throw scenario_parse_error(where + ": unknown key '" + key + "' in [" +
                                       section + "]");
        if (values[section].count(key))
            throw scenario_parse_error(where + ": duplicate key '" + key + "'");
        if (val.empty()) throw scenario_parse_error(where + ": empty value for '" + key + "'");
        values[section][key] = val;
    }

    for (const std::string required : {"regime0", "regime1", "model"}) {
        if (!values.count(required))
            throw scenario_parse_error(origin + ": missing section [" + required + "]");
        for (const std::string& key : schema.at(required))
            if (!values[required].count(key))
                throw scenario_parse_error(origin + ": missing key '" + key + "' in [" +
                                           required + "]");
    }

    auto num = [&](const std::string& sec, const std::string& key) {
        return detail::parse_number(values[sec][key], origin + " [" + sec + "] " + key);
    };
    ScenarioFile out;
    auto read_regime = [&](const std::string& sec) {
        RegimeParams r;
        r.mu = num(sec, "mu");
        r.sigma = num(sec, "sigma");
        r.jump_intensity = num(sec, "jump_intensity");
        r.jump_rate = num(sec, "jump_rate");
        return r;
    };
    out.scenario.regime0 = read_regime("regime0");
    out.scenario.regime1 = read_regime("regime1");
    out.scenario.q = num("model", "q");
    out.scenario.b = num("model", "b");
    out.scenario.a_target = num("model", "a_target");
    out.scenario.run_rate = num("model", "run_rate");
    out.scenario.penalty_coeff = num("model", "penalty_coeff");
    out.scenario.bprime = 0.0;
    out.scenario.validate();

    if (values.count("optimize")) {
        auto& sec = values["optimize"];
        if (sec.count("lo")) out.optimize.lo = num("optimize", "lo");
        if (sec.count("hi")) out.optimize.hi = num("optimize", "hi");
        if (sec.count("steps")) {
            const double st = num("optimize", "steps");
            if (st < 2 || st != std::floor(st))
                throw scenario_parse_error(origin + " [optimize] steps: must be an integer >= 2");
            out.optimize.steps = static_cast<int>(st);
        }
    }
    return out;
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw scenario_parse_error("cannot open scenario file: " + path);
    return parse_scenario(in, path);
}

}  // namespace pcax
