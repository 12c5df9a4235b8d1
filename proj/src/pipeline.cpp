#include "risim/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "risim/config_io.hpp"

namespace risim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (sizes.empty())
        throw std::invalid_argument("experiment needs at least one (M, N)");
    if (ls_count == 0 || ss_count == 0)
        throw std::invalid_argument("dataset shape must be nonzero");
    if (n_train + n_val + n_test != ls_count * ss_count)
        throw std::invalid_argument(
            "split sizes must sum to ls_count * ss_count");
    if (estimators.empty())
        throw std::invalid_argument("experiment needs at least one estimator");
    for (const std::string& name : estimators)
        estimator_from_string(name);  // throws on unknown names
    if (epochs == 0 || batch == 0 || lr <= 0.0)
        throw std::invalid_argument("bad training shape");
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::hardening: return "hardening";
        case EstimatorKind::model_based: return "model_based";
        case EstimatorKind::learned: return "learned";
        case EstimatorKind::baseline_a: return "baseline_A";
        case EstimatorKind::baseline_b: return "baseline_B";
    }
    throw std::invalid_argument("unknown estimator kind");
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "hardening") return EstimatorKind::hardening;
    if (name == "model_based") return EstimatorKind::model_based;
    if (name == "learned") return EstimatorKind::learned;
    if (name == "baseline_A" || name == "baseline_a")
        return EstimatorKind::baseline_a;
    if (name == "baseline_B" || name == "baseline_b")
        return EstimatorKind::baseline_b;
    throw std::invalid_argument("unknown estimator: " + name);
}

FeatureSet estimator_feature_set(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::learned: return FeatureSet::all4;
        case EstimatorKind::baseline_a: return FeatureSet::baseline_a;
        case EstimatorKind::baseline_b: return FeatureSet::baseline_b;
        default:
            throw std::invalid_argument(
                "estimator has no feature set: " + to_string(kind));
    }
}

bool estimator_is_learned(EstimatorKind kind) {
    return kind == EstimatorKind::learned ||
           kind == EstimatorKind::baseline_a ||
           kind == EstimatorKind::baseline_b;
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
    Scenario sc = cfg.scenario;
    sc.finalize();
    const arma::uword n_symbols = sc.tau_c - sc.effective_tau_p();

    Dataset ds;
    ds.meta.seed = sc.seed;
    ds.meta.config_hash = config_hash(cfg);
    ds.meta.M = sc.M;
    ds.meta.N = sc.N;
    ds.meta.L = sc.L;
    ds.meta.K = sc.K;
    ds.meta.regime = sc.regime;
    ds.meta.ls_count = cfg.ls_count;
    ds.meta.ss_count = cfg.ss_count;
    ds.records.reserve(cfg.ls_count * cfg.ss_count);

    for (arma::uword i = 0; i < cfg.ls_count; ++i) {
        const LinkContext ctx = make_link_context(sc, i);
        const std::vector<UeStatistics> stats =
            compute_ue_statistics(ctx, cfg.genie_samples);
        for (arma::uword j = 0; j < cfg.ss_count; ++j) {
            RngStream fade =
                RngStream::derive(sc.seed, StreamTag::small_scale, i, j);
            const CoherenceInterval ci = run_coherence_interval(ctx, fade);
            RngStream dl =
                RngStream::derive(sc.seed, StreamTag::dl_symbols, i, j, 0);
            const arma::cx_vec y = downlink_receive(ci.gains, 0, n_symbols, dl);
            FeatureRecord rec = build_feature_record(
                sample_mean_power(y), stats[0], ci.gains.alpha(0, 0));
            rec.ls_index = i;
            rec.ss_index = j;
            rec.ue = 0;
            ds.records.push_back(rec);
        }
    }
    return ds;
}

std::vector<cx_double> estimator_predictions(const Dataset& ds,
                                             const arma::uvec& idx,
                                             EstimatorKind kind,
                                             const MlpModel* model,
                                             const Normalizer* norm) {
    std::vector<cx_double> out;
    out.reserve(idx.n_elem);
    if (estimator_is_learned(kind)) {
        if (model == nullptr || norm == nullptr)
            throw std::invalid_argument("missing model for " + to_string(kind));
        const FeatureSet set = estimator_feature_set(kind);
        for (arma::uword i : idx)
            out.push_back(
                mlp_predict(*model, *norm, feature_vector(ds.records[i], set)));
        return out;
    }
    for (arma::uword i : idx) {
        const FeatureRecord& rec = ds.records[i];
        UeStatistics stats;
        stats.mean_alpha_kk = rec.mean_alpha;
        stats.delta_k = rec.delta;
        stats.power_feature = rec.power;
        out.push_back(kind == EstimatorKind::hardening
                          ? hardening_bound_estimate(stats)
                          : model_based_estimate(rec.xi, stats));
    }
    return out;
}

EvalOutcome evaluate_nmse(const Dataset& ds, const arma::uvec& test_idx,
                          const std::vector<cx_double>& predictions,
                          arma::uword bootstrap_resamples, RngStream& rng) {
    if (predictions.size() != test_idx.n_elem || test_idx.is_empty())
        throw std::invalid_argument("evaluate_nmse: prediction/index mismatch");

    std::vector<cx_double> truths;
    truths.reserve(test_idx.n_elem);
    for (arma::uword i : test_idx)
        truths.push_back(ds.records[i].label_alpha);

    EvalOutcome out;
    out.n = test_idx.n_elem;
    out.nmse_db = nmse_db(predictions, truths);

    // Per-record squared errors and powers, grouped by large-scale
    // realization so resampling respects the clustered draws.
    std::map<arma::uword, arma::uword> cluster_of;  // ls_index -> position
    std::vector<double> num_c, den_c;
    for (arma::uword t = 0; t < test_idx.n_elem; ++t) {
        const FeatureRecord& rec = ds.records[test_idx(t)];
        auto [it, inserted] =
            cluster_of.try_emplace(rec.ls_index, num_c.size());
        if (inserted) {
            num_c.push_back(0.0);
            den_c.push_back(0.0);
        }
        num_c[it->second] += std::norm(rec.label_alpha - predictions[t]);
        den_c[it->second] += std::norm(rec.label_alpha);
    }
    const arma::uword n_clusters = num_c.size();
    if (n_clusters < 2 || bootstrap_resamples == 0) {
        out.ci_lo_db = out.nmse_db;
        out.ci_hi_db = out.nmse_db;
        return out;
    }

    arma::vec boot(bootstrap_resamples);
    for (arma::uword b = 0; b < bootstrap_resamples; ++b) {
        double num = 0.0, den = 0.0;
        for (arma::uword c = 0; c < n_clusters; ++c) {
            const arma::uword pick = rng.uniform_index(n_clusters);
            num += num_c[pick];
            den += den_c[pick];
        }
        boot(b) = (num <= 0.0 || den <= 0.0) ? -300.0
                                             : 10.0 * std::log10(num / den);
    }
    const arma::vec q = arma::quantile(boot, arma::vec{0.025, 0.975});
    out.ci_lo_db = q(0);
    out.ci_hi_db = q(1);
    return out;
}

namespace {

std::string size_tag(const SizePair& s) {
    return "M" + std::to_string(s.M) + "_N" + std::to_string(s.N);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    ResultTable table;
    nlohmann::json manifest;
    manifest["tool"] = "risim 0.1.0";
    manifest["config"] = experiment_to_json(cfg);
    manifest["config_hash"] = hash_hex(config_hash(cfg));
    manifest["seed"] = cfg.scenario.seed;
    nlohmann::json sizes_json = nlohmann::json::array();

    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
        const SizePair size = cfg.sizes[si];
        ExperimentConfig sized = cfg;
        sized.scenario.M = size.M;
        sized.scenario.N = size.N;
        sized.scenario.finalize();
        const std::string tag = size_tag(size);

        Dataset ds = generate_dataset(sized);
        const std::string ds_path = cfg.out_dir + "/dataset_" + tag + ".bin";
        save_dataset(ds_path, ds);
        SplitIndices splits =
            split_dataset(ds, cfg.n_train, cfg.n_val, cfg.n_test,
                          sized.scenario.seed, !cfg.flat_split);
        const std::string splits_path =
            cfg.out_dir + "/splits_" + tag + ".json";
        save_splits(splits_path, splits);

        nlohmann::json size_json;
        size_json["m"] = size.M;
        size_json["n"] = size.N;
        size_json["dataset"] = ds_path;
        size_json["splits"] = splits_path;
        size_json["records"] = ds.records.size();
        nlohmann::json models_json = nlohmann::json::array();

        // Train whichever learned estimators were requested.
        std::map<EstimatorKind, std::pair<MlpModel, Normalizer>> trained;
        for (const std::string& name : cfg.estimators) {
            const EstimatorKind kind = estimator_from_string(name);
            if (!estimator_is_learned(kind) || trained.count(kind))
                continue;
            const FeatureSet set = estimator_feature_set(kind);
            const arma::mat X = feature_matrix(ds, set);
            const arma::vec y = label_vector(ds);
            const std::uint64_t train_seed = mix_u64(
                sized.scenario.seed ^
                mix_u64((static_cast<std::uint64_t>(si) << 8) |
                        static_cast<std::uint64_t>(kind)));
            RngStream init =
                RngStream::derive(train_seed, StreamTag::weight_init);
            MlpModel model = make_default_mlp(feature_count(set), init);
            Normalizer norm;
            TrainConfig tc;
            tc.epochs = cfg.epochs;
            tc.batch = cfg.batch;
            tc.lr = cfg.lr;
            tc.seed = train_seed;

            const auto t0 = Clock::now();
            TrainHistory hist =
                train_mlp(model, norm, X, y, splits.train, splits.val, tc);
            TimingRecord timing;
            timing.model = to_string(kind) + "_" + tag;
            timing.epochs = cfg.epochs;
            timing.best_epoch = hist.best_epoch;
            timing.train_seconds = seconds_since(t0);

            const auto t1 = Clock::now();
            estimator_predictions(ds, splits.test, kind, &model, &norm);
            timing.infer_seconds_per_100k =
                seconds_since(t1) * 1e5 /
                static_cast<double>(splits.test.n_elem);
            table.timing.push_back(timing);

            const std::string ckpt = cfg.out_dir + "/model_" +
                                     to_string(kind) + "_" + tag + ".ckpt";
            save_checkpoint(ckpt, model, norm);
            nlohmann::json mj;
            mj["name"] = to_string(kind);
            mj["checkpoint"] = ckpt;
            mj["best_epoch"] = hist.best_epoch;
            mj["best_val_mse"] = hist.best_val_mse;
            mj["final_train_mse"] = hist.train_mse.back();
            mj["train_seconds"] = timing.train_seconds;
            mj["infer_seconds_per_100k"] = timing.infer_seconds_per_100k;
            models_json.push_back(mj);
            trained.emplace(kind, std::make_pair(std::move(model),
                                                 std::move(norm)));
        }

        for (const std::string& name : cfg.estimators) {
            const EstimatorKind kind = estimator_from_string(name);
            const MlpModel* model = nullptr;
            const Normalizer* norm = nullptr;
            if (estimator_is_learned(kind)) {
                const auto& entry = trained.at(kind);
                model = &entry.first;
                norm = &entry.second;
            }
            const std::vector<cx_double> preds =
                estimator_predictions(ds, splits.test, kind, model, norm);
            RngStream boot = RngStream::derive(
                sized.scenario.seed, StreamTag::bootstrap, si,
                static_cast<std::uint64_t>(kind));
            const EvalOutcome eval = evaluate_nmse(
                ds, splits.test, preds, cfg.bootstrap_resamples, boot);

            ResultRow row;
            row.estimator = to_string(kind);
            row.regime = to_string(sized.scenario.regime);
            row.M = size.M;
            row.N = size.N;
            row.n_test = eval.n;
            row.nmse_db = eval.nmse_db;
            row.ci_lo_db = eval.ci_lo_db;
            row.ci_hi_db = eval.ci_hi_db;
            table.rows.push_back(row);
        }
        size_json["models"] = models_json;
        sizes_json.push_back(size_json);
    }

    manifest["sizes"] = sizes_json;
    nlohmann::json timing_json = nlohmann::json::array();
    for (const TimingRecord& t : table.timing) {
        nlohmann::json tj;
        tj["model"] = t.model;
        tj["epochs"] = t.epochs;
        tj["best_epoch"] = t.best_epoch;
        tj["train_seconds"] = t.train_seconds;
        tj["infer_seconds_per_100k"] = t.infer_seconds_per_100k;
        timing_json.push_back(tj);
    }
    manifest["timing"] = timing_json;

    write_results_csv(cfg.out_dir + "/results.csv", table);
    std::ofstream mf(cfg.out_dir + "/manifest.json", std::ios::trunc);
    if (!mf)
        throw std::runtime_error("cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
    return table;
}

void write_results_csv(const std::string& path, const ResultTable& table) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::fputs("estimator,regime,M,N,n_test,nmse_db,ci_lo_db,ci_hi_db\n", f);
    for (const ResultRow& r : table.rows) {
        std::fprintf(f, "%s,%s,%llu,%llu,%llu,%.6f,%.6f,%.6f\n",
                     r.estimator.c_str(), r.regime.c_str(),
                     static_cast<unsigned long long>(r.M),
                     static_cast<unsigned long long>(r.N),
                     static_cast<unsigned long long>(r.n_test), r.nmse_db,
                     r.ci_lo_db, r.ci_hi_db);
    }
    std::fclose(f);
}

std::string timing_summary(const TimingRecord& rec) {
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "%s: %llu epochs (best %llu), train %.2f s, "
                  "inference %.3f s per 1e5 predictions",
                  rec.model.c_str(),
                  static_cast<unsigned long long>(rec.epochs),
                  static_cast<unsigned long long>(rec.best_epoch),
                  rec.train_seconds, rec.infer_seconds_per_100k);
    return std::string(buf);
}

}  // namespace risim
