#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risim/config_io.hpp"
#include "risim/pipeline.hpp"

using namespace risim;

namespace {

// Something far from the defaults on every serialized field.
Scenario odd_scenario() {
    Scenario sc;
    sc.M = 12;
    sc.N = 6;
    sc.L = 3;
    sc.K = 4;
    sc.bs_position = {-3.5, 2.25};
    sc.ris_positions = {{11.0, 29.0}, {9.0, -31.0}, {8.5, 60.0}};
    sc.ue_area = {120.0, 260.0, -40.0, 45.0};
    sc.altitude_gap = 7.5;
    sc.d_B_over_lambda = 0.4;
    sc.d_R_over_lambda = 0.3;
    sc.nx_override = 3;
    sc.rho_ul = 2.5e10;
    sc.rho_d = 1.25e12;
    sc.tau_c = 700;
    sc.tau_p = 6;
    sc.regime = LosRegime::los_dominated;
    sc.los_k_boost_db = 12.5;
    sc.bs_ris_los = false;
    sc.seed = 99;
    sc.phase.a_min = 0.31;
    sc.phase.b = 1.1;
    sc.phase.phi = 0.9;
    sc.pathloss.los_intercept_db = -31.0;
    sc.pathloss.los_slope_db = -25.0;
    sc.pathloss.nlos_intercept_db = -35.5;
    sc.pathloss.nlos_slope_db = -37.0;
    sc.pathloss.k_intercept_db = 14.0;
    sc.pathloss.k_slope_db_per_m = -0.04;
    sc.pathloss.los_prob_cutoff_m = 20.0;
    sc.pathloss.los_prob_decay_m = 40.0;
    sc.pathloss.noise_power_dbm = -90.0;
    return sc;
}

void check_scenario_equal(const Scenario& a, const Scenario& b) {
    CHECK(b.M == a.M);
    CHECK(b.N == a.N);
    CHECK(b.L == a.L);
    CHECK(b.K == a.K);
    CHECK(arma::norm(b.bs_position - a.bs_position, "inf") == 0.0);
    REQUIRE(b.ris_positions.n_rows == a.ris_positions.n_rows);
    if (a.ris_positions.n_elem)
        CHECK(arma::norm(b.ris_positions - a.ris_positions, "inf") == 0.0);
    CHECK(arma::norm(b.ue_area - a.ue_area, "inf") == 0.0);
    CHECK(b.altitude_gap == a.altitude_gap);
    CHECK(b.d_B_over_lambda == a.d_B_over_lambda);
    CHECK(b.d_R_over_lambda == a.d_R_over_lambda);
    CHECK(b.nx_override == a.nx_override);
    CHECK(b.rho_ul == a.rho_ul);
    CHECK(b.rho_d == a.rho_d);
    CHECK(b.tau_c == a.tau_c);
    CHECK(b.tau_p == a.tau_p);
    CHECK(b.regime == a.regime);
    CHECK(b.los_k_boost_db == a.los_k_boost_db);
    CHECK(b.bs_ris_los == a.bs_ris_los);
    CHECK(b.seed == a.seed);
    CHECK(b.phase.a_min == a.phase.a_min);
    CHECK(b.phase.b == a.phase.b);
    CHECK(b.phase.phi == a.phase.phi);
    CHECK(b.pathloss.los_intercept_db == a.pathloss.los_intercept_db);
    CHECK(b.pathloss.los_slope_db == a.pathloss.los_slope_db);
    CHECK(b.pathloss.nlos_intercept_db == a.pathloss.nlos_intercept_db);
    CHECK(b.pathloss.nlos_slope_db == a.pathloss.nlos_slope_db);
    CHECK(b.pathloss.k_intercept_db == a.pathloss.k_intercept_db);
    CHECK(b.pathloss.k_slope_db_per_m == a.pathloss.k_slope_db_per_m);
    CHECK(b.pathloss.los_prob_cutoff_m == a.pathloss.los_prob_cutoff_m);
    CHECK(b.pathloss.los_prob_decay_m == a.pathloss.los_prob_decay_m);
    CHECK(b.pathloss.noise_power_dbm == a.pathloss.noise_power_dbm);
}

// Cheap but real end-to-end shape: small arrays, few realizations.
ExperimentConfig tiny_experiment(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.scenario.M = 6;
    cfg.scenario.N = 4;
    cfg.scenario.L = 1;
    cfg.scenario.K = 2;
    cfg.scenario.regime = LosRegime::nlos_dominated;
    cfg.scenario.seed = 17;
    cfg.sizes = {{6, 4}};
    cfg.ls_count = 6;
    cfg.ss_count = 5;
    cfg.n_train = 15;
    cfg.n_val = 5;
    cfg.n_test = 10;
    cfg.epochs = 3;
    cfg.batch = 8;
    cfg.genie_samples = 40;
    cfg.bootstrap_resamples = 50;
    cfg.estimators = {"hardening", "model_based", "learned"};
    cfg.out_dir = out_dir;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

struct CsvRow {
    std::string estimator, regime;
    arma::uword M, N, n_test;
    double nmse_db, ci_lo_db, ci_hi_db;
};

std::vector<CsvRow> parse_results_csv(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string line;
    REQUIRE(std::getline(f, line));
    REQUIRE(line == "estimator,regime,M,N,n_test,nmse_db,ci_lo_db,ci_hi_db");
    std::vector<CsvRow> rows;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        REQUIRE(cells.size() == 8);
        rows.push_back({cells[0], cells[1],
                        static_cast<arma::uword>(std::stoull(cells[2])),
                        static_cast<arma::uword>(std::stoull(cells[3])),
                        static_cast<arma::uword>(std::stoull(cells[4])),
                        std::stod(cells[5]), std::stod(cells[6]),
                        std::stod(cells[7])});
    }
    return rows;
}

}  // namespace

TEST_CASE("scenario json round-trips and partial configs keep defaults") {
    const Scenario sc = odd_scenario();
    const Scenario back = scenario_from_json(scenario_to_json(sc));
    check_scenario_equal(sc, back);

    const Scenario partial = scenario_from_json(
        nlohmann::json::parse(R"({"m": 7, "regime": "los_dominated"})"));
    CHECK(partial.M == 7);
    CHECK(partial.regime == LosRegime::los_dominated);
    CHECK(partial.N == Scenario{}.N);
    CHECK(partial.tau_c == Scenario{}.tau_c);

    CHECK_THROWS_AS(
        scenario_from_json(nlohmann::json::parse(R"({"ue_area": [1, 2]})")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        scenario_from_json(nlohmann::json::parse(R"({"regime": "sunny"})")),
        std::invalid_argument);
}

TEST_CASE("experiment json round-trips") {
    ExperimentConfig cfg;
    cfg.scenario = odd_scenario();
    cfg.sizes = {{20, 9}, {50, 36}};
    cfg.ls_count = 11;
    cfg.ss_count = 3;
    cfg.n_train = 12;
    cfg.n_val = 6;
    cfg.n_test = 15;
    cfg.flat_split = true;
    cfg.epochs = 5;
    cfg.batch = 64;
    cfg.lr = 0.003;
    cfg.genie_samples = 77;
    cfg.bootstrap_resamples = 123;
    cfg.estimators = {"learned", "baseline_A"};
    cfg.out_dir = "some/dir";

    const ExperimentConfig back = experiment_from_json(experiment_to_json(cfg));
    check_scenario_equal(cfg.scenario, back.scenario);
    REQUIRE(back.sizes.size() == 2);
    CHECK(back.sizes[1].M == 50);
    CHECK(back.sizes[1].N == 36);
    CHECK(back.ls_count == 11);
    CHECK(back.ss_count == 3);
    CHECK(back.n_train == 12);
    CHECK(back.n_val == 6);
    CHECK(back.n_test == 15);
    CHECK(back.flat_split == true);
    CHECK(back.epochs == 5);
    CHECK(back.batch == 64);
    CHECK(back.lr == 0.003);
    CHECK(back.genie_samples == 77);
    CHECK(back.bootstrap_resamples == 123);
    CHECK(back.estimators == cfg.estimators);
    CHECK(back.out_dir == "some/dir");

    // partial: only what's present is applied
    const ExperimentConfig part =
        experiment_from_json(nlohmann::json::parse(R"({"epochs": 9})"));
    CHECK(part.epochs == 9);
    CHECK(part.batch == ExperimentConfig{}.batch);
    CHECK(part.estimators == ExperimentConfig{}.estimators);

    CHECK_THROWS_AS(
        experiment_from_json(nlohmann::json::parse(R"({"sizes": [[40]]})")),
        std::invalid_argument);
}

TEST_CASE("scenario ini round-trips through a file") {
    const Scenario sc = odd_scenario();
    const std::string path = "scenario_roundtrip_test.ini";
    save_scenario_ini(path, sc);
    const Scenario back = load_scenario_ini(path);
    check_scenario_equal(sc, back);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_scenario_ini("no_such_scenario.ini"),
                    std::runtime_error);
}

TEST_CASE("scenario ini accepts comments, blanks and partial content") {
    std::istringstream in(
        "# top comment\n"
        "\n"
        "[geometry]\n"
        "m = 9          ; trailing comment\n"
        "ris_0 = 10 30\n"
        "ris_1 = 10 -30\n"
        "l = 2\r\n"
        "\n"
        "[radio]\n"
        "bs_ris_los = false\n"
        "rho_ul = 1.5e9\n"
        "regime = los_dominated\n"
        "\n"
        "[pathloss]\n"
        "k_intercept_db = inf\n");
    const Scenario sc = scenario_from_ini(in);
    CHECK(sc.M == 9);
    CHECK(sc.L == 2);
    REQUIRE(sc.ris_positions.n_rows == 2);
    CHECK(sc.ris_positions(1, 0) == 10.0);
    CHECK(sc.ris_positions(1, 1) == -30.0);
    CHECK(sc.bs_ris_los == false);
    CHECK(sc.rho_ul == 1.5e9);
    CHECK(sc.regime == LosRegime::los_dominated);
    CHECK(std::isinf(sc.pathloss.k_intercept_db));
    // untouched keys keep their defaults
    CHECK(sc.N == Scenario{}.N);
    CHECK(sc.phase.a_min == Scenario{}.phase.a_min);
}

TEST_CASE("scenario ini rejects malformed input with line numbers") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return scenario_from_ini(in);
    };
    CHECK_THROWS_AS(parse("[geometry]\nbogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[nowhere]\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[geometry\nm = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("m = 4\n"), std::invalid_argument);  // no section
    CHECK_THROWS_AS(parse("[geometry]\nm\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[geometry]\nm = x\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[geometry]\nm = 4.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[geometry]\nbs_position = 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse("[radio]\nbs_ris_los = maybe\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse("[radio]\nregime = sunny\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[phase]\nm = 4\n"), std::invalid_argument);
    // ris rows must index 0..count-1
    CHECK_THROWS_AS(parse("[geometry]\nris_0 = 1 2\nris_2 = 3 4\n"),
                    std::invalid_argument);

    try {
        parse("[geometry]\nm = 4\nbogus = 1\n");
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
}

TEST_CASE("config hash tracks content, not identity") {
    ExperimentConfig a = tiny_experiment("out");
    ExperimentConfig b = tiny_experiment("out");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(hash_hex(config_hash(a)).size() == 16);

    b.lr = a.lr * 2;
    CHECK(config_hash(a) != config_hash(b));
    b = tiny_experiment("out");
    b.scenario.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    b = tiny_experiment("out");
    b.estimators.pop_back();
    CHECK(config_hash(a) != config_hash(b));
    b = tiny_experiment("out");
    b.sizes[0].M = 7;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("experiment validation") {
    ExperimentConfig cfg = tiny_experiment("out");
    CHECK_NOTHROW(cfg.validate());

    ExperimentConfig bad = cfg;
    bad.n_test += 1;  // splits no longer sum to ls*ss
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sizes.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.ls_count = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.estimators = {"psychic"};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.estimators.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.lr = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("estimator names, feature sets and flags") {
    const EstimatorKind kinds[5] = {
        EstimatorKind::hardening, EstimatorKind::model_based,
        EstimatorKind::learned, EstimatorKind::baseline_a,
        EstimatorKind::baseline_b};
    for (EstimatorKind k : kinds)
        CHECK(estimator_from_string(to_string(k)) == k);
    CHECK(estimator_from_string("baseline_a") == EstimatorKind::baseline_a);
    CHECK(estimator_from_string("baseline_b") == EstimatorKind::baseline_b);
    CHECK_THROWS_AS(estimator_from_string("psychic"), std::invalid_argument);

    CHECK(estimator_feature_set(EstimatorKind::learned) == FeatureSet::all4);
    CHECK(estimator_feature_set(EstimatorKind::baseline_a) ==
          FeatureSet::baseline_a);
    CHECK(estimator_feature_set(EstimatorKind::baseline_b) ==
          FeatureSet::baseline_b);
    CHECK_THROWS_AS(estimator_feature_set(EstimatorKind::hardening),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimator_feature_set(EstimatorKind::model_based),
                    std::invalid_argument);

    CHECK_FALSE(estimator_is_learned(EstimatorKind::hardening));
    CHECK_FALSE(estimator_is_learned(EstimatorKind::model_based));
    CHECK(estimator_is_learned(EstimatorKind::learned));
    CHECK(estimator_is_learned(EstimatorKind::baseline_a));
    CHECK(estimator_is_learned(EstimatorKind::baseline_b));
}

TEST_CASE("dataset generation has the advertised shape and is reproducible") {
    ExperimentConfig cfg = tiny_experiment("out");
    cfg.ls_count = 2;
    cfg.ss_count = 3;
    cfg.n_train = 3;
    cfg.n_val = 0;
    cfg.n_test = 3;

    const Dataset ds = generate_dataset(cfg);
    CHECK(ds.meta.M == 6);
    CHECK(ds.meta.N == 4);
    CHECK(ds.meta.K == 2);
    CHECK(ds.meta.regime == LosRegime::nlos_dominated);
    CHECK(ds.meta.seed == cfg.scenario.seed);
    CHECK(ds.meta.ls_count == 2);
    CHECK(ds.meta.ss_count == 3);
    REQUIRE(ds.records.size() == 6);
    for (arma::uword i = 0; i < 6; ++i) {
        CHECK(ds.records[i].ls_index == i / 3);
        CHECK(ds.records[i].ss_index == i % 3);
        CHECK(ds.records[i].ue == 0);
        CHECK(ds.records[i].xi > 0.0);
        CHECK(ds.records[i].delta >= 1.0);
        CHECK(ds.records[i].power > 0.0);
    }
    // statistics are per-realization, the label varies per draw
    CHECK(ds.records[0].delta == ds.records[1].delta);
    CHECK(ds.records[0].label_alpha != ds.records[1].label_alpha);
    CHECK(ds.records[0].delta != ds.records[3].delta);

    const Dataset again = generate_dataset(cfg);
    REQUIRE(again.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(again.records[i].xi == ds.records[i].xi);
        CHECK(again.records[i].delta == ds.records[i].delta);
        CHECK(again.records[i].power == ds.records[i].power);
        CHECK(again.records[i].mean_alpha == ds.records[i].mean_alpha);
        CHECK(again.records[i].label_alpha == ds.records[i].label_alpha);
    }

    ExperimentConfig other = cfg;
    other.scenario.seed = 18;
    const Dataset moved = generate_dataset(other);
    CHECK(moved.records[0].label_alpha != ds.records[0].label_alpha);
}

TEST_CASE("statistics-based predictions reproduce the per-record formulas") {
    Dataset ds;
    FeatureRecord r;
    r.xi = 5.5;
    r.delta = 1.5;
    r.power = 3.0;
    r.mean_alpha = {0.25, -0.125};
    r.label_alpha = {2.0, 0.0};
    ds.records.push_back(r);
    r.xi = 0.5;  // below delta: model-based falls back to the mean
    ds.records.push_back(r);
    const arma::uvec idx = {0, 1};

    const auto hard = estimator_predictions(ds, idx, EstimatorKind::hardening,
                                            nullptr, nullptr);
    CHECK(hard[0] == cx_double{0.25, -0.125});
    CHECK(hard[1] == cx_double{0.25, -0.125});

    const auto mb = estimator_predictions(ds, idx, EstimatorKind::model_based,
                                          nullptr, nullptr);
    CHECK(mb[0].real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mb[0].imag() == 0.0);
    CHECK(mb[1] == cx_double{0.25, -0.125});

    CHECK_THROWS_AS(estimator_predictions(ds, idx, EstimatorKind::learned,
                                          nullptr, nullptr),
                    std::invalid_argument);
}

TEST_CASE("nmse evaluation: exact point values and cluster bootstrap") {
    Dataset ds;
    for (arma::uword ls = 0; ls < 4; ++ls) {
        for (arma::uword ss = 0; ss < 2; ++ss) {
            FeatureRecord r;
            r.ls_index = ls;
            r.ss_index = ss;
            r.label_alpha = {1.0 + 0.1 * static_cast<double>(ls), 0.0};
            ds.records.push_back(r);
        }
    }
    arma::uvec idx(8);
    for (arma::uword i = 0; i < 8; ++i)
        idx(i) = i;

    // estimates at exactly half the truth: NMSE = 10 log10(1/4)
    std::vector<cx_double> half;
    for (arma::uword i : idx)
        half.push_back(0.5 * ds.records[i].label_alpha);
    RngStream rng(5);
    const EvalOutcome out = evaluate_nmse(ds, idx, half, 200, rng);
    CHECK(out.n == 8);
    CHECK(out.nmse_db == doctest::Approx(10.0 * std::log10(0.25)).epsilon(1e-12));
    // every cluster has the same ratio, so the interval is that same point
    CHECK(out.ci_lo_db == doctest::Approx(out.nmse_db).epsilon(1e-12));
    CHECK(out.ci_hi_db == doctest::Approx(out.nmse_db).epsilon(1e-12));

    // perfect estimates hit the floor
    std::vector<cx_double> exact;
    for (arma::uword i : idx)
        exact.push_back(ds.records[i].label_alpha);
    RngStream rng2(6);
    const EvalOutcome zero = evaluate_nmse(ds, idx, exact, 200, rng2);
    CHECK(zero.nmse_db == -300.0);
    CHECK(zero.ci_lo_db == -300.0);
    CHECK(zero.ci_hi_db == -300.0);

    // heterogeneous errors: interval brackets the point estimate
    std::vector<cx_double> rough;
    RngStream noise(7);
    for (arma::uword i : idx)
        rough.push_back(ds.records[i].label_alpha +
                        cx_double{0.2 * noise.gaussian(), 0.0});
    RngStream rng3(8);
    const EvalOutcome r = evaluate_nmse(ds, idx, rough, 500, rng3);
    CHECK(r.ci_lo_db <= r.nmse_db);
    CHECK(r.ci_hi_db >= r.nmse_db);
    CHECK(r.ci_lo_db < r.ci_hi_db);

    // deterministic given the stream
    RngStream rng4(8);
    const EvalOutcome r2 = evaluate_nmse(ds, idx, rough, 500, rng4);
    CHECK(r2.ci_lo_db == r.ci_lo_db);
    CHECK(r2.ci_hi_db == r.ci_hi_db);

    std::vector<cx_double> short_preds(3);
    CHECK_THROWS_AS(evaluate_nmse(ds, idx, short_preds, 10, rng),
                    std::invalid_argument);
}

TEST_CASE("experiment runs are resumable from their artifacts") {
    namespace fs = std::filesystem;
    const std::string dir = "pipe_run_a";
    fs::remove_all(dir);
    ExperimentConfig cfg = tiny_experiment(dir);
    const ResultTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 3);  // one size, three estimators
    CHECK(table.timing.size() == 1);  // only "learned" trains

    // artifacts exist
    CHECK(fs::exists(dir + "/dataset_M6_N4.bin"));
    CHECK(fs::exists(dir + "/splits_M6_N4.json"));
    CHECK(fs::exists(dir + "/model_learned_M6_N4.ckpt"));
    CHECK(fs::exists(dir + "/results.csv"));
    CHECK(fs::exists(dir + "/manifest.json"));

    // manifest parses and repeats the config hash
    nlohmann::json manifest;
    {
        std::ifstream mf(dir + "/manifest.json");
        mf >> manifest;
    }
    CHECK(manifest.at("config_hash").get<std::string>() ==
          hash_hex(config_hash(cfg)));
    CHECK(manifest.at("sizes").size() == 1);
    CHECK(manifest.at("sizes")[0].at("records").get<std::size_t>() == 30);

    // rebuild every row from the stored artifacts alone
    const Dataset ds = load_dataset(dir + "/dataset_M6_N4.bin");
    const SplitIndices splits = load_splits(dir + "/splits_M6_N4.json");
    MlpModel model;
    Normalizer norm;
    load_checkpoint(dir + "/model_learned_M6_N4.ckpt", model, norm);

    for (const ResultRow& row : table.rows) {
        const EstimatorKind kind = estimator_from_string(row.estimator);
        const std::vector<cx_double> preds = estimator_predictions(
            ds, splits.test, kind, &model, &norm);
        RngStream boot = RngStream::derive(cfg.scenario.seed,
                                           StreamTag::bootstrap, 0,
                                           static_cast<std::uint64_t>(kind));
        const EvalOutcome eval = evaluate_nmse(ds, splits.test, preds,
                                               cfg.bootstrap_resamples, boot);
        CHECK(eval.n == row.n_test);
        CHECK(eval.nmse_db == doctest::Approx(row.nmse_db).epsilon(1e-12));
        CHECK(eval.ci_lo_db == doctest::Approx(row.ci_lo_db).epsilon(1e-12));
        CHECK(eval.ci_hi_db == doctest::Approx(row.ci_hi_db).epsilon(1e-12));
    }

    // the CSV holds the same numbers at its printed precision
    const std::vector<CsvRow> csv = parse_results_csv(dir + "/results.csv");
    REQUIRE(csv.size() == table.rows.size());
    for (std::size_t i = 0; i < csv.size(); ++i) {
        CHECK(csv[i].estimator == table.rows[i].estimator);
        CHECK(csv[i].regime == "nlos_dominated");
        CHECK(csv[i].M == 6);
        CHECK(csv[i].N == 4);
        CHECK(csv[i].n_test == 10);
        CHECK(csv[i].nmse_db ==
              doctest::Approx(table.rows[i].nmse_db).epsilon(1e-5));
    }
    fs::remove_all(dir);
}

TEST_CASE("reruns produce byte-identical results even elsewhere on disk") {
    namespace fs = std::filesystem;
    fs::remove_all("pipe_run_b");
    fs::remove_all("pipe_run_c");
    const ResultTable t1 = run_experiment(tiny_experiment("pipe_run_b"));
    const ResultTable t2 = run_experiment(tiny_experiment("pipe_run_c"));
    REQUIRE(t1.rows.size() == t2.rows.size());
    CHECK(slurp("pipe_run_b/results.csv") == slurp("pipe_run_c/results.csv"));
    fs::remove_all("pipe_run_b");
    fs::remove_all("pipe_run_c");
}

TEST_CASE("flat-split experiments take arbitrary split sizes") {
    namespace fs = std::filesystem;
    const std::string dir = "pipe_run_flat";
    fs::remove_all(dir);
    ExperimentConfig cfg = tiny_experiment(dir);
    cfg.flat_split = true;
    cfg.n_train = 17;
    cfg.n_val = 6;
    cfg.n_test = 7;
    cfg.estimators = {"hardening", "model_based"};

    const ResultTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.timing.empty());  // nothing to train
    for (const ResultRow& row : table.rows)
        CHECK(row.n_test == 7);
    fs::remove_all(dir);
}
