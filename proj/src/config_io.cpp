#include "risim/config_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace risim {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

void maybe_uword(const json& j, const char* key, arma::uword& out) {
    if (j.contains(key))
        out = j.at(key).get<std::uint64_t>();
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& sc) {
    json j;
    j["m"] = sc.M;
    j["n"] = sc.N;
    j["l"] = sc.L;
    j["k"] = sc.K;
    j["bs_position"] = {sc.bs_position(0), sc.bs_position(1)};
    if (sc.ris_positions.n_rows == sc.L && sc.L > 0) {
        json rows = json::array();
        for (arma::uword l = 0; l < sc.L; ++l)
            rows.push_back({sc.ris_positions(l, 0), sc.ris_positions(l, 1)});
        j["ris_positions"] = rows;
    }
    j["ue_area"] = {sc.ue_area(0), sc.ue_area(1), sc.ue_area(2), sc.ue_area(3)};
    j["altitude_gap"] = sc.altitude_gap;
    j["d_b_over_lambda"] = sc.d_B_over_lambda;
    j["d_r_over_lambda"] = sc.d_R_over_lambda;
    j["nx_override"] = sc.nx_override;
    j["rho_ul"] = sc.rho_ul;
    j["rho_d"] = sc.rho_d;
    j["tau_c"] = sc.tau_c;
    j["tau_p"] = sc.tau_p;
    j["regime"] = to_string(sc.regime);
    j["los_k_boost_db"] = sc.los_k_boost_db;
    j["bs_ris_los"] = sc.bs_ris_los;
    j["seed"] = sc.seed;

    json ph;
    ph["a_min"] = sc.phase.a_min;
    ph["b"] = sc.phase.b;
    ph["phi"] = sc.phase.phi;
    j["phase"] = ph;

    json pl;
    pl["los_intercept_db"] = sc.pathloss.los_intercept_db;
    pl["los_slope_db"] = sc.pathloss.los_slope_db;
    pl["nlos_intercept_db"] = sc.pathloss.nlos_intercept_db;
    pl["nlos_slope_db"] = sc.pathloss.nlos_slope_db;
    pl["k_intercept_db"] = sc.pathloss.k_intercept_db;
    pl["k_slope_db_per_m"] = sc.pathloss.k_slope_db_per_m;
    pl["los_prob_cutoff_m"] = sc.pathloss.los_prob_cutoff_m;
    pl["los_prob_decay_m"] = sc.pathloss.los_prob_decay_m;
    pl["noise_power_dbm"] = sc.pathloss.noise_power_dbm;
    j["pathloss"] = pl;
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    maybe_uword(j, "m", sc.M);
    maybe_uword(j, "n", sc.N);
    maybe_uword(j, "l", sc.L);
    maybe_uword(j, "k", sc.K);
    if (j.contains("bs_position")) {
        auto v = j.at("bs_position").get<std::vector<double>>();
        if (v.size() != 2)
            throw std::invalid_argument("bs_position needs [x, y]");
        sc.bs_position = {v[0], v[1]};
    }
    if (j.contains("ris_positions")) {
        const auto& rows = j.at("ris_positions");
        sc.ris_positions.set_size(rows.size(), 2);
        for (std::size_t l = 0; l < rows.size(); ++l) {
            auto v = rows[l].get<std::vector<double>>();
            if (v.size() != 2)
                throw std::invalid_argument("ris_positions rows need [x, y]");
            sc.ris_positions(l, 0) = v[0];
            sc.ris_positions(l, 1) = v[1];
        }
    }
    if (j.contains("ue_area")) {
        auto v = j.at("ue_area").get<std::vector<double>>();
        if (v.size() != 4)
            throw std::invalid_argument("ue_area needs [x0, x1, y0, y1]");
        sc.ue_area = {v[0], v[1], v[2], v[3]};
    }
    maybe(j, "altitude_gap", sc.altitude_gap);
    maybe(j, "d_b_over_lambda", sc.d_B_over_lambda);
    maybe(j, "d_r_over_lambda", sc.d_R_over_lambda);
    maybe_uword(j, "nx_override", sc.nx_override);
    maybe(j, "rho_ul", sc.rho_ul);
    maybe(j, "rho_d", sc.rho_d);
    maybe_uword(j, "tau_c", sc.tau_c);
    maybe_uword(j, "tau_p", sc.tau_p);
    if (j.contains("regime"))
        sc.regime = los_regime_from_string(j.at("regime").get<std::string>());
    maybe(j, "los_k_boost_db", sc.los_k_boost_db);
    maybe(j, "bs_ris_los", sc.bs_ris_los);
    maybe(j, "seed", sc.seed);
    if (j.contains("phase")) {
        const auto& ph = j.at("phase");
        maybe(ph, "a_min", sc.phase.a_min);
        maybe(ph, "b", sc.phase.b);
        maybe(ph, "phi", sc.phase.phi);
    }
    if (j.contains("pathloss")) {
        const auto& pl = j.at("pathloss");
        maybe(pl, "los_intercept_db", sc.pathloss.los_intercept_db);
        maybe(pl, "los_slope_db", sc.pathloss.los_slope_db);
        maybe(pl, "nlos_intercept_db", sc.pathloss.nlos_intercept_db);
        maybe(pl, "nlos_slope_db", sc.pathloss.nlos_slope_db);
        maybe(pl, "k_intercept_db", sc.pathloss.k_intercept_db);
        maybe(pl, "k_slope_db_per_m", sc.pathloss.k_slope_db_per_m);
        maybe(pl, "los_prob_cutoff_m", sc.pathloss.los_prob_cutoff_m);
        maybe(pl, "los_prob_decay_m", sc.pathloss.los_prob_decay_m);
        maybe(pl, "noise_power_dbm", sc.pathloss.noise_power_dbm);
    }
    return sc;
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = scenario_to_json(cfg.scenario);
    json sizes = json::array();
    for (const SizePair& s : cfg.sizes)
        sizes.push_back({s.M, s.N});
    j["sizes"] = sizes;
    j["ls_count"] = cfg.ls_count;
    j["ss_count"] = cfg.ss_count;
    j["n_train"] = cfg.n_train;
    j["n_val"] = cfg.n_val;
    j["n_test"] = cfg.n_test;
    j["flat_split"] = cfg.flat_split;
    j["epochs"] = cfg.epochs;
    j["batch"] = cfg.batch;
    j["lr"] = cfg.lr;
    j["genie_samples"] = cfg.genie_samples;
    j["bootstrap_resamples"] = cfg.bootstrap_resamples;
    j["estimators"] = cfg.estimators;
    j["out_dir"] = cfg.out_dir;
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("scenario"))
        cfg.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("sizes")) {
        cfg.sizes.clear();
        for (const auto& row : j.at("sizes")) {
            auto v = row.get<std::vector<std::uint64_t>>();
            if (v.size() != 2)
                throw std::invalid_argument("sizes rows need [M, N]");
            cfg.sizes.push_back({static_cast<arma::uword>(v[0]),
                                 static_cast<arma::uword>(v[1])});
        }
    }
    maybe_uword(j, "ls_count", cfg.ls_count);
    maybe_uword(j, "ss_count", cfg.ss_count);
    maybe_uword(j, "n_train", cfg.n_train);
    maybe_uword(j, "n_val", cfg.n_val);
    maybe_uword(j, "n_test", cfg.n_test);
    maybe(j, "flat_split", cfg.flat_split);
    maybe_uword(j, "epochs", cfg.epochs);
    maybe_uword(j, "batch", cfg.batch);
    maybe(j, "lr", cfg.lr);
    maybe_uword(j, "genie_samples", cfg.genie_samples);
    maybe_uword(j, "bootstrap_resamples", cfg.bootstrap_resamples);
    maybe(j, "estimators", cfg.estimators);
    maybe(j, "out_dir", cfg.out_dir);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    json j;
    f >> j;
    return experiment_from_json(j);
}

void save_experiment_config(const std::string& path,
                            const ExperimentConfig& cfg) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    f << experiment_to_json(cfg).dump(2) << "\n";
}

namespace {

std::string ini_trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

[[noreturn]] void ini_fail(int line, const std::string& what) {
    throw std::invalid_argument("scenario ini line " + std::to_string(line) +
                                ": " + what);
}

double ini_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        ini_fail(line, "bad number '" + v + "' for " + key);
    }
}

arma::uword ini_uword(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long long u = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-')
            throw std::invalid_argument("trailing characters");
        return static_cast<arma::uword>(u);
    } catch (const std::exception&) {
        ini_fail(line, "bad integer '" + v + "' for " + key);
    }
}

bool ini_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    ini_fail(line, "bad bool '" + v + "' for " + key + " (true/false)");
}

std::vector<double> ini_doubles(const std::string& v, std::size_t want,
                                int line, const std::string& key) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok)
        out.push_back(ini_double(tok, line, key));
    if (out.size() != want)
        ini_fail(line, key + " needs " + std::to_string(want) +
                           " whitespace-separated values");
    return out;
}

std::string ini_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Scenario scenario_from_ini(std::istream& in) {
    Scenario sc;
    std::map<arma::uword, std::array<double, 2>> ris_rows;
    std::string section;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = ini_trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                ini_fail(line_no, "malformed section header");
            section = ini_trim(line.substr(1, line.size() - 2));
            if (section != "geometry" && section != "radio" &&
                section != "phase" && section != "pathloss")
                ini_fail(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            ini_fail(line_no, "expected key = value");
        const std::string key = ini_trim(line.substr(0, eq));
        const std::string value = ini_trim(line.substr(eq + 1));
        if (key.empty())
            ini_fail(line_no, "empty key");
        if (section.empty())
            ini_fail(line_no, "key '" + key + "' before any [section]");

        if (section == "geometry") {
            if (key == "m") {
                sc.M = ini_uword(value, line_no, key);
            } else if (key == "n") {
                sc.N = ini_uword(value, line_no, key);
            } else if (key == "l") {
                sc.L = ini_uword(value, line_no, key);
            } else if (key == "k") {
                sc.K = ini_uword(value, line_no, key);
            } else if (key == "bs_position") {
                const auto v = ini_doubles(value, 2, line_no, key);
                sc.bs_position = {v[0], v[1]};
            } else if (key == "ue_area") {
                const auto v = ini_doubles(value, 4, line_no, key);
                sc.ue_area = {v[0], v[1], v[2], v[3]};
            } else if (key == "altitude_gap") {
                sc.altitude_gap = ini_double(value, line_no, key);
            } else if (key == "d_b_over_lambda") {
                sc.d_B_over_lambda = ini_double(value, line_no, key);
            } else if (key == "d_r_over_lambda") {
                sc.d_R_over_lambda = ini_double(value, line_no, key);
            } else if (key == "nx_override") {
                sc.nx_override = ini_uword(value, line_no, key);
            } else if (key.rfind("ris_", 0) == 0) {
                const arma::uword l =
                    ini_uword(key.substr(4), line_no, key);
                const auto v = ini_doubles(value, 2, line_no, key);
                ris_rows[l] = {v[0], v[1]};
            } else {
                ini_fail(line_no, "unknown key '" + key + "' in [geometry]");
            }
        } else if (section == "radio") {
            if (key == "rho_ul") {
                sc.rho_ul = ini_double(value, line_no, key);
            } else if (key == "rho_d") {
                sc.rho_d = ini_double(value, line_no, key);
            } else if (key == "tau_c") {
                sc.tau_c = ini_uword(value, line_no, key);
            } else if (key == "tau_p") {
                sc.tau_p = ini_uword(value, line_no, key);
            } else if (key == "regime") {
                try {
                    sc.regime = los_regime_from_string(value);
                } catch (const std::exception& e) {
                    ini_fail(line_no, e.what());
                }
            } else if (key == "los_k_boost_db") {
                sc.los_k_boost_db = ini_double(value, line_no, key);
            } else if (key == "bs_ris_los") {
                sc.bs_ris_los = ini_bool(value, line_no, key);
            } else if (key == "seed") {
                sc.seed = ini_uword(value, line_no, key);
            } else {
                ini_fail(line_no, "unknown key '" + key + "' in [radio]");
            }
        } else if (section == "phase") {
            if (key == "a_min") {
                sc.phase.a_min = ini_double(value, line_no, key);
            } else if (key == "b") {
                sc.phase.b = ini_double(value, line_no, key);
            } else if (key == "phi") {
                sc.phase.phi = ini_double(value, line_no, key);
            } else {
                ini_fail(line_no, "unknown key '" + key + "' in [phase]");
            }
        } else {  // pathloss
            if (key == "los_intercept_db") {
                sc.pathloss.los_intercept_db = ini_double(value, line_no, key);
            } else if (key == "los_slope_db") {
                sc.pathloss.los_slope_db = ini_double(value, line_no, key);
            } else if (key == "nlos_intercept_db") {
                sc.pathloss.nlos_intercept_db =
                    ini_double(value, line_no, key);
            } else if (key == "nlos_slope_db") {
                sc.pathloss.nlos_slope_db = ini_double(value, line_no, key);
            } else if (key == "k_intercept_db") {
                sc.pathloss.k_intercept_db = ini_double(value, line_no, key);
            } else if (key == "k_slope_db_per_m") {
                sc.pathloss.k_slope_db_per_m =
                    ini_double(value, line_no, key);
            } else if (key == "los_prob_cutoff_m") {
                sc.pathloss.los_prob_cutoff_m =
                    ini_double(value, line_no, key);
            } else if (key == "los_prob_decay_m") {
                sc.pathloss.los_prob_decay_m =
                    ini_double(value, line_no, key);
            } else if (key == "noise_power_dbm") {
                sc.pathloss.noise_power_dbm = ini_double(value, line_no, key);
            } else {
                ini_fail(line_no, "unknown key '" + key + "' in [pathloss]");
            }
        }
    }
    if (!ris_rows.empty()) {
        const arma::uword count = ris_rows.size();
        sc.ris_positions.set_size(count, 2);
        for (const auto& [l, xy] : ris_rows) {
            if (l >= count)
                throw std::invalid_argument(
                    "scenario ini: ris_<i> indices must be contiguous from 0 "
                    "(got ris_" +
                    std::to_string(l) + " among " + std::to_string(count) +
                    " rows)");
            sc.ris_positions(l, 0) = xy[0];
            sc.ris_positions(l, 1) = xy[1];
        }
    }
    return sc;
}

Scenario load_scenario_ini(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    return scenario_from_ini(f);
}

void save_scenario_ini(const std::string& path, const Scenario& sc) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    f << "[geometry]\n";
    f << "m = " << sc.M << "\n";
    f << "n = " << sc.N << "\n";
    f << "l = " << sc.L << "\n";
    f << "k = " << sc.K << "\n";
    f << "bs_position = " << ini_num(sc.bs_position(0)) << " "
      << ini_num(sc.bs_position(1)) << "\n";
    for (arma::uword l = 0; l < sc.ris_positions.n_rows; ++l)
        f << "ris_" << l << " = " << ini_num(sc.ris_positions(l, 0)) << " "
          << ini_num(sc.ris_positions(l, 1)) << "\n";
    f << "ue_area = " << ini_num(sc.ue_area(0)) << " " << ini_num(sc.ue_area(1))
      << " " << ini_num(sc.ue_area(2)) << " " << ini_num(sc.ue_area(3))
      << "\n";
    f << "altitude_gap = " << ini_num(sc.altitude_gap) << "\n";
    f << "d_b_over_lambda = " << ini_num(sc.d_B_over_lambda) << "\n";
    f << "d_r_over_lambda = " << ini_num(sc.d_R_over_lambda) << "\n";
    f << "nx_override = " << sc.nx_override << "\n";
    f << "\n[radio]\n";
    f << "rho_ul = " << ini_num(sc.rho_ul) << "\n";
    f << "rho_d = " << ini_num(sc.rho_d) << "\n";
    f << "tau_c = " << sc.tau_c << "\n";
    f << "tau_p = " << sc.tau_p << "\n";
    f << "regime = " << to_string(sc.regime) << "\n";
    f << "los_k_boost_db = " << ini_num(sc.los_k_boost_db) << "\n";
    f << "bs_ris_los = " << (sc.bs_ris_los ? "true" : "false") << "\n";
    f << "seed = " << sc.seed << "\n";
    f << "\n[phase]\n";
    f << "a_min = " << ini_num(sc.phase.a_min) << "\n";
    f << "b = " << ini_num(sc.phase.b) << "\n";
    f << "phi = " << ini_num(sc.phase.phi) << "\n";
    f << "\n[pathloss]\n";
    f << "los_intercept_db = " << ini_num(sc.pathloss.los_intercept_db)
      << "\n";
    f << "los_slope_db = " << ini_num(sc.pathloss.los_slope_db) << "\n";
    f << "nlos_intercept_db = " << ini_num(sc.pathloss.nlos_intercept_db)
      << "\n";
    f << "nlos_slope_db = " << ini_num(sc.pathloss.nlos_slope_db) << "\n";
    f << "k_intercept_db = " << ini_num(sc.pathloss.k_intercept_db) << "\n";
    f << "k_slope_db_per_m = " << ini_num(sc.pathloss.k_slope_db_per_m)
      << "\n";
    f << "los_prob_cutoff_m = " << ini_num(sc.pathloss.los_prob_cutoff_m)
      << "\n";
    f << "los_prob_decay_m = " << ini_num(sc.pathloss.los_prob_decay_m)
      << "\n";
    f << "noise_power_dbm = " << ini_num(sc.pathloss.noise_power_dbm) << "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string dump = experiment_to_json(cfg).dump();  // sorted keys
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace risim
