// zkdyn batch front-end: spectrum / random / direction / sweep / check.
//
// Config is a flat key = value document with dotted sections; values are
// JSON literals. Exit codes: 0 success, 2 config/validation error,
// 3 numerical failure, 4 rationality refusal.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "zkdyn/zkdyn.hpp"

using json = nlohmann::json;
using namespace zkdyn;

namespace {

const std::map<std::string, bool> kKnownKeys = {
    {"action.matrices", true},  {"action.epsilon", true},
    {"run.n_steps", true},      {"run.burn_in", true},
    {"run.reorth_period", true},{"run.grouping_epsilon", true},
    {"run.seed", true},         {"run.x0", true},
    {"run.sample_points", true},
    {"random.weights", true},   {"random.n_omegas", true},
    {"direction.v", true},      {"sweep.resolution", true},
    {"check.tolerance", true},
    {"output.path", true},      {"output.format", true},
};

struct Config {
    std::map<std::string, json> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    const json& require(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ValidationError("missing config key: " + key);
        return it->second;
    }

    template <class T>
    T get_or(const std::string& key, T fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second.get<T>();
    }
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!kKnownKeys.count(key))
            throw ValidationError("unknown config key: " + key);
        try {
            cfg.kv[key] = json::parse(value);
        } catch (const json::exception& e) {
            throw ValidationError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

struct Problem {
    std::vector<IntegerMatrix> matrices;
    ZkAction action;
    bool conjugated = false;
    EstimatorConfig est;
    TorusPoint x0;
    int sample_points = 16;
};

Problem build_problem(const Config& cfg) {
    const json& mats = cfg.require("action.matrices");
    std::vector<IntegerMatrix> matrices;
    for (const auto& mj : mats) {
        IntegerMatrix A;
        const Eigen::Index d = static_cast<Eigen::Index>(mj.size());
        A.entries = MatI::Zero(d, d);
        Eigen::Index r = 0;
        for (const auto& row : mj) {
            if (static_cast<Eigen::Index>(row.size()) != d)
                throw ValidationError("action.matrices: matrices must be square");
            Eigen::Index c = 0;
            for (const auto& x : row) {
                if (!x.is_number_integer())
                    throw ValidationError("action.matrices: entries must be integers");
                A.entries(r, c++) = x.get<long long>();
            }
            ++r;
        }
        matrices.push_back(std::move(A));
    }
    ZkAction linear = from_matrices(matrices);
    ZkAction action = linear;
    bool conjugated = false;
    if (cfg.has("action.epsilon")) {
        ConjugacyParams params;
        auto eps = cfg.require("action.epsilon").get<std::vector<double>>();
        params.epsilon = Eigen::Map<const Vec>(eps.data(), static_cast<Eigen::Index>(eps.size()));
        if (params.epsilon.size() != linear.dim())
            throw ValidationError("action.epsilon: need one amplitude per torus coordinate");
        action = conjugate_action(linear, params);
        conjugated = true;
    }
    EstimatorConfig est;
    est.n_steps = cfg.get_or<long>("run.n_steps", est.n_steps);
    est.burn_in = cfg.get_or<long>("run.burn_in", est.burn_in);
    est.reorth_period = cfg.get_or<int>("run.reorth_period", est.reorth_period);
    est.grouping_epsilon = cfg.get_or<double>("run.grouping_epsilon", est.grouping_epsilon);
    est.seed = cfg.get_or<std::uint64_t>("run.seed", est.seed);
    est.validate();
    TorusPoint x0 = sample_grid(action.dim(), 1)[0];
    if (cfg.has("run.x0")) {
        auto v = cfg.require("run.x0").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(v.size()) != action.dim())
            throw ValidationError("run.x0: wrong dimension");
        x0 = TorusPoint(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    int sp = cfg.get_or<int>("run.sample_points", 16);
    if (sp < 1) throw ValidationError("run.sample_points >= 1");
    return {std::move(matrices), std::move(action), conjugated, est, x0, sp};
}

json spectrum_to_json(const LyapunovSpectrum& s) {
    json blocks = json::array();
    for (const auto& b : s.blocks) blocks.push_back({{"d", b.multiplicity}, {"rates", b.rates}});
    return {{"blocks", blocks}, {"dim", s.dim}, {"grouping_ambiguous", s.grouping_ambiguous}};
}

// spectrum expanded to one rate tuple per frame vector, in lexicographic
// order (stable across groupings even when block rate sums tie)
std::vector<std::vector<double>> expand_rows(const LyapunovSpectrum& s) {
    std::vector<std::vector<double>> rows;
    for (const auto& b : s.blocks)
        for (int c = 0; c < b.multiplicity; ++c) rows.push_back(b.rates);
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::string format_sig12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + out_path);
    out << text;
}

Direction config_direction(const Config& cfg, int rank, double* raw_norm = nullptr) {
    auto vv = cfg.require("direction.v").get<std::vector<double>>();
    if (static_cast<int>(vv.size()) != rank)
        throw ValidationError("direction.v: wrong length for action rank");
    Vec raw = Eigen::Map<const Vec>(vv.data(), static_cast<Eigen::Index>(vv.size()));
    if (raw_norm) *raw_norm = raw.norm();
    return Direction::normalized(raw);
}

int cmd_spectrum(const Config& cfg, const std::string& out_path) {
    Problem p = build_problem(cfg);
    LyapunovSpectrum est = generator_spectrum(p.action, p.x0, p.est);
    json out = {{"command", "spectrum"}, {"estimated", spectrum_to_json(est)}};
    try {
        AnalyticSpectrum exact = analytic_spectrum(p.matrices);
        out["analytic"] = spectrum_to_json(exact);
        auto er = expand_rows(est), ar = expand_rows(exact);
        json errs = json::array();
        for (size_t j = 0; j < er.size(); ++j) {
            json row = json::array();
            for (size_t i = 0; i < er[j].size(); ++i)
                row.push_back(std::fabs(er[j][i] - ar[j][i]));
            errs.push_back(row);
        }
        out["abs_error_per_rate"] = errs;
    } catch (const NotSimultaneouslyDiagonalizable&) {
        // estimate stands on its own
    }
    write_output(out.dump(2) + "\n", out_path);
    return 0;
}

int cmd_random(const Config& cfg, const std::string& out_path) {
    Problem p = build_problem(cfg);
    RandomModel model{cfg.require("random.weights").get<std::vector<double>>()};
    model.validate();
    if (static_cast<int>(model.weights.size()) != p.action.rank())
        throw ValidationError("random.weights: wrong length for action rank");
    long n_omegas = cfg.get_or<long>("random.n_omegas", 10);
    RandomExponents re = random_exponents(p.action, model, p.x0, p.est, n_omegas);
    EntropyEstimate pesin = random_entropy_pesin_mc(p.action, model, p.est, p.sample_points);
    double measured = 0.0, mstderr = 0.0;
    for (size_t j = 0; j < re.mean.size(); ++j)
        if (re.mean[j] > 0) {
            measured += re.mean[j];
            mstderr += re.cross_omega_stddev[j] * re.cross_omega_stddev[j];
        }
    mstderr = std::sqrt(mstderr) / std::sqrt(static_cast<double>(n_omegas));
    bool ruelle_ok =
        random_entropy_ruelle_check(generator_spectrum(p.action, p.x0, p.est), model,
                                    {measured, EntropyMethod::ruelle_bound, mstderr, n_omegas});
    json out = {{"command", "random"},
                {"weights", model.weights},
                {"per_omega", re.per_omega},
                {"mean", re.mean},
                {"cross_omega_stddev", re.cross_omega_stddev},
                {"pesin_entropy", {{"value", pesin.value},
                                   {"method", to_string(pesin.method)},
                                   {"stderr", pesin.stderr_},
                                   {"samples", pesin.samples}}},
                {"measured_entropy", measured},
                {"ruelle_check", ruelle_ok}};
    write_output(out.dump(2) + "\n", out_path);
    return 0;
}

int cmd_direction(const Config& cfg, const std::string& out_path) {
    Problem p = build_problem(cfg);
    double raw_norm = 1.0;
    Direction v = config_direction(cfg, p.action.rank(), &raw_norm);
    LyapunovSpectrum est = generator_spectrum(p.action, p.x0, p.est);
    std::vector<double> rates = directional_exponents(p.action, v, p.x0, p.est);
    EntropyEstimate formula = directional_entropy(est, v);
    double from_rates = 0.0;
    for (double r : rates) from_rates += std::max(0.0, r);
    json out = {{"command", "direction"},
                {"v", std::vector<double>(v.v.data(), v.v.data() + v.v.size())},
                {"raw_norm", raw_norm},
                {"estimated_rates", rates},
                {"entropy_formula", formula.value},
                {"entropy_from_estimated_rates", from_rates},
                {"entropy_scaled_by_raw_norm", raw_norm * formula.value}};
    write_output(out.dump(2) + "\n", out_path);
    return 0;
}

int cmd_sweep(const Config& cfg, const std::string& out_path) {
    Problem p = build_problem(cfg);
    int resolution = cfg.require("sweep.resolution").get<int>();
    LyapunovSpectrum est = generator_spectrum(p.action, p.x0, p.est);
    SweepResult sweep = direction_sweep(p.action, est, resolution, p.x0, p.est);
    std::ostringstream csv;
    csv << "theta,v1,v2,entropy_formula,entropy_from_estimated_rates,max_block_residual\n";
    for (const auto& row : sweep.rows) {
        csv << format_sig12(row.theta) << "," << format_sig12(row.v[0]) << ","
            << format_sig12(row.v[1]) << "," << format_sig12(row.entropy_formula) << ","
            << format_sig12(row.entropy_from_estimated_rates) << ","
            << format_sig12(row.max_block_residual) << "\n";
    }
    write_output(csv.str(), out_path);
    return 0;
}

int cmd_check(const Config& cfg, const std::string& out_path) {
    Problem p = build_problem(cfg);
    Direction v = config_direction(cfg, p.action.rank());
    double tolerance = cfg.get_or<double>("check.tolerance", 1e-2);
    LyapunovSpectrum est = generator_spectrum(p.action, p.x0, p.est);
    auto oracle = [&p](const LatticeVector& w) {
        return matrix_entropy(compose_lattice(p.matrices, w));
    };
    RationalCheck rc = rational_check(p.action, est, v, p.x0, p.est, oracle);
    bool pass = std::fabs(rc.lhs.value - rc.rhs.value) <= tolerance;
    json out = {{"command", "check"},
                {"v", std::vector<double>(v.v.data(), v.v.data() + v.v.size())},
                {"t", rc.scale},
                {"integer_vector",
                 std::vector<int>(rc.integer_vector.data(),
                                  rc.integer_vector.data() + rc.integer_vector.size())},
                {"lhs", rc.lhs.value},
                {"rhs", rc.rhs.value},
                {"rhs_method", to_string(rc.rhs.method)},
                {"tolerance", tolerance},
                {"pass", pass}};
    write_output(out.dump(2) + "\n", out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Z^k-action Lyapunov spectra and entropy formulas"};
    app.require_subcommand(1);
    std::string config_path, out_override;
    long long seed_override = -1;
    bool quiet = false;
    app.add_option("--config", config_path, "config file path")->required();
    app.add_option("--out", out_override, "output path (overrides config)");
    app.add_option("--seed", seed_override, "seed (overrides config)");
    app.add_flag("--quiet", quiet, "suppress progress messages");
    auto* sub_spectrum = app.add_subcommand("spectrum", "estimate the joint generator spectrum");
    auto* sub_random = app.add_subcommand("random", "random exponents and random entropy");
    auto* sub_direction = app.add_subcommand("direction", "directional exponents and entropy");
    auto* sub_sweep = app.add_subcommand("sweep", "angular entropy sweep (CSV)");
    auto* sub_check = app.add_subcommand("check", "rational-direction identity cross-check");
    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = parse_config(config_path);
        if (seed_override >= 0) cfg.kv["run.seed"] = seed_override;
        std::string out_path = out_override.empty()
                                   ? cfg.get_or<std::string>("output.path", "")
                                   : out_override;
        if (!quiet && !out_path.empty())
            std::cerr << "writing " << out_path << "\n";
        if (sub_spectrum->parsed()) return cmd_spectrum(cfg, out_path);
        if (sub_random->parsed()) return cmd_random(cfg, out_path);
        if (sub_direction->parsed()) return cmd_direction(cfg, out_path);
        if (sub_sweep->parsed()) return cmd_sweep(cfg, out_path);
        if (sub_check->parsed()) return cmd_check(cfg, out_path);
        return 2;
    } catch (const NotRational& e) {
        std::cerr << "NotRational: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NotCommutingExact& e) {
        std::cerr << "NotCommutingExact: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
