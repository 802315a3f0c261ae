#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscilap/errors.hpp"
#include "oscilap/ladder.hpp"
#include "oscilap/nonlinearity.hpp"

namespace oscilap {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
    double half_width = 1.0;
    int n_interior = 257;
    double s = 0.4;
    NonlinearitySpec spec;
    std::string table_path;  // custom-table family source, empty otherwise
    Construction construction = Construction::power_shift_origin;
    LadderDirection direction = LadderDirection::origin;
    int K = 3;
    LadderOptions ladder;
    double window_p = 0.5;
    std::vector<double> sweep_lambdas;
    std::string out_dir = "out";
};

namespace detail {

inline void expect_keys(const ordered_json& j, const std::set<std::string>& allowed,
                        const std::string& section) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + section + "." + it.key() + "'");
}

template <class T>
T get_or(const ordered_json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Family family_from(const std::string& s) {
    if (s == "origin-oscillatory") return Family::origin_oscillatory;
    if (s == "infinity-oscillatory") return Family::infinity_oscillatory;
    if (s == "custom-table") return Family::custom_table;
    throw ConfigError("unknown nonlinearity family '" + s + "'");
}

inline std::string family_name(Family f) {
    switch (f) {
        case Family::origin_oscillatory: return "origin-oscillatory";
        case Family::infinity_oscillatory: return "infinity-oscillatory";
        case Family::custom_table: return "custom-table";
    }
    return "";
}

inline Construction construction_from(const std::string& s) {
    if (s == "linear-shift-origin") return Construction::linear_shift_origin;
    if (s == "power-shift-origin") return Construction::power_shift_origin;
    if (s == "linear-shift-infinity") return Construction::linear_shift_infinity;
    if (s == "power-shift-infinity") return Construction::power_shift_infinity;
    if (s == "two-powers") return Construction::two_powers;
    if (s == "perturbed") return Construction::perturbed;
    throw ConfigError("unknown construction '" + s + "'");
}

inline std::string construction_name(Construction c) {
    switch (c) {
        case Construction::linear_shift_origin: return "linear-shift-origin";
        case Construction::power_shift_origin: return "power-shift-origin";
        case Construction::linear_shift_infinity: return "linear-shift-infinity";
        case Construction::power_shift_infinity: return "power-shift-infinity";
        case Construction::two_powers: return "two-powers";
        case Construction::perturbed: return "perturbed";
    }
    return "";
}

inline LadderDirection direction_from(const std::string& s) {
    if (s == "origin") return LadderDirection::origin;
    if (s == "infinity") return LadderDirection::infinity_;
    throw ConfigError("unknown ladder direction '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config(const ordered_json& j) {
    using detail::expect_keys;
    using detail::get_or;
    expect_keys(j, {"domain", "s", "nonlinearity", "construction", "ladder", "solver",
                    "sweep", "output"},
                "<root>");
    RunConfig cfg;
    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        expect_keys(d, {"half_width", "n_interior"}, "domain");
        cfg.half_width = get_or(d, "half_width", cfg.half_width);
        cfg.n_interior = get_or(d, "n_interior", cfg.n_interior);
    }
    cfg.s = get_or(j, "s", cfg.s);
    if (!(cfg.s > 0.0 && cfg.s < 1.0)) throw ConfigError("s must lie in (0,1)");
    if (!(cfg.half_width > 0.0)) throw ConfigError("domain.half_width must be positive");
    if (cfg.n_interior < 3) throw ConfigError("domain.n_interior must be at least 3");

    if (j.contains("nonlinearity")) {
        const auto& nl = j.at("nonlinearity");
        expect_keys(nl, {"family", "alpha", "beta", "a", "table_path"}, "nonlinearity");
        cfg.spec.family = detail::family_from(
            get_or<std::string>(nl, "family", "origin-oscillatory"));
        cfg.spec.alpha = get_or(nl, "alpha", cfg.spec.alpha);
        cfg.spec.beta = get_or(nl, "beta", cfg.spec.beta);
        cfg.spec.a = get_or(nl, "a", cfg.spec.a);
        cfg.table_path = get_or<std::string>(nl, "table_path", "");
        if (cfg.spec.family == Family::custom_table) {
            if (cfg.table_path.empty())
                throw ConfigError("custom-table family requires nonlinearity.table_path");
            cfg.spec.table = load_table_spec(cfg.table_path).table;
        }
    }
    if (j.contains("construction")) {
        const auto& c = j.at("construction");
        expect_keys(c, {"name", "lambda", "p", "mu_lin", "q", "mu_q", "eps"}, "construction");
        cfg.construction =
            detail::construction_from(get_or<std::string>(c, "name", "power-shift-origin"));
        cfg.spec.lambda = get_or(c, "lambda", cfg.spec.lambda);
        cfg.spec.p = get_or(c, "p", cfg.spec.p);
        cfg.spec.mu_lin = get_or(c, "mu_lin", cfg.spec.mu_lin);
        cfg.spec.q = get_or(c, "q", cfg.spec.q);
        cfg.spec.mu_q = get_or(c, "mu_q", cfg.spec.mu_q);
        cfg.spec.eps = get_or(c, "eps", cfg.spec.eps);
    }
    if (j.contains("ladder")) {
        const auto& l = j.at("ladder");
        expect_keys(l, {"direction", "K", "search_lo", "search_hi", "samples_per_decade"},
                    "ladder");
        cfg.direction = detail::direction_from(get_or<std::string>(l, "direction", "origin"));
        cfg.K = get_or(l, "K", cfg.K);
        cfg.ladder.search_lo = get_or(l, "search_lo", cfg.ladder.search_lo);
        cfg.ladder.search_hi = get_or(l, "search_hi", cfg.ladder.search_hi);
        cfg.ladder.samples_per_decade =
            get_or(l, "samples_per_decade", cfg.ladder.samples_per_decade);
        if (cfg.K < 1) throw ConfigError("ladder.K must be at least 1");
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        expect_keys(s, {"tol", "max_iter", "random_starts", "rng_seed"}, "solver");
        cfg.ladder.solver.tol = get_or(s, "tol", cfg.ladder.solver.tol);
        cfg.ladder.solver.max_iter = get_or(s, "max_iter", cfg.ladder.solver.max_iter);
        cfg.ladder.solver.random_starts =
            get_or(s, "random_starts", cfg.ladder.solver.random_starts);
        cfg.ladder.solver.rng_seed = get_or(s, "rng_seed", cfg.ladder.solver.rng_seed);
        if (!(cfg.ladder.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
    }
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        expect_keys(sw, {"p", "lambdas"}, "sweep");
        cfg.window_p = get_or(sw, "p", cfg.window_p);
        cfg.sweep_lambdas = get_or(sw, "lambdas", cfg.sweep_lambdas);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        expect_keys(o, {"directory"}, "output");
        cfg.out_dir = get_or<std::string>(o, "directory", cfg.out_dir);
    }
    return cfg;
}

inline ordered_json config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["domain"] = {{"half_width", cfg.half_width}, {"n_interior", cfg.n_interior}};
    j["s"] = cfg.s;
    j["nonlinearity"] = {{"family", detail::family_name(cfg.spec.family)},
                         {"alpha", cfg.spec.alpha},
                         {"beta", cfg.spec.beta},
                         {"a", cfg.spec.a},
                         {"table_path", cfg.table_path}};
    j["construction"] = {{"name", detail::construction_name(cfg.construction)},
                         {"lambda", cfg.spec.lambda},
                         {"p", cfg.spec.p},
                         {"mu_lin", cfg.spec.mu_lin},
                         {"q", cfg.spec.q},
                         {"mu_q", cfg.spec.mu_q},
                         {"eps", cfg.spec.eps}};
    j["ladder"] = {{"direction",
                    cfg.direction == LadderDirection::origin ? "origin" : "infinity"},
                   {"K", cfg.K},
                   {"search_lo", cfg.ladder.search_lo},
                   {"search_hi", cfg.ladder.search_hi},
                   {"samples_per_decade", cfg.ladder.samples_per_decade}};
    j["solver"] = {{"tol", cfg.ladder.solver.tol},
                   {"max_iter", cfg.ladder.solver.max_iter},
                   {"random_starts", cfg.ladder.solver.random_starts},
                   {"rng_seed", cfg.ladder.solver.rng_seed}};
    j["sweep"] = {{"p", cfg.window_p}, {"lambdas", cfg.sweep_lambdas}};
    j["output"] = {{"directory", cfg.out_dir}};
    return j;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace oscilap
