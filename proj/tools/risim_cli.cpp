#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risim/config_io.hpp"
#include "risim/link_simulation.hpp"
#include "risim/pipeline.hpp"

namespace {

using namespace risim;

ExperimentConfig load_config_or_default(const std::string& path,
                                        std::uint64_t seed_override) {
    ExperimentConfig cfg;
    if (!path.empty()) {
        // .ini files carry only the scenario; everything else keeps defaults.
        if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ini") == 0)
            cfg.scenario = load_scenario_ini(path);
        else
            cfg = load_experiment_config(path);
    }
    if (seed_override != 0)
        cfg.scenario.seed = seed_override;
    return cfg;
}

int cmd_simulate(const ExperimentConfig& cfg, arma::uword ls_index) {
    Scenario sc = cfg.scenario;
    sc.finalize();
    const LinkContext ctx = make_link_context(sc, ls_index);
    RngStream fade = RngStream::derive(sc.seed, StreamTag::small_scale,
                                       ls_index, 0);
    const CoherenceInterval ci = run_coherence_interval(ctx, fade);
    const std::vector<UeStatistics> stats =
        compute_ue_statistics(ctx, cfg.genie_samples);

    std::printf("scenario: M=%llu N=%llu L=%llu K=%llu regime=%s seed=%llu\n",
                (unsigned long long)sc.M, (unsigned long long)sc.N,
                (unsigned long long)sc.L, (unsigned long long)sc.K,
                to_string(sc.regime).c_str(), (unsigned long long)sc.seed);
    std::printf("powers: rho_ul=%.4g rho_d=%.4g tau_c=%llu tau_p=%llu\n",
                sc.rho_ul, sc.rho_d, (unsigned long long)sc.tau_c,
                (unsigned long long)sc.effective_tau_p());
    std::printf("large-scale realization %llu:\n",
                (unsigned long long)ls_index);
    for (arma::uword l = 0; l < sc.L; ++l)
        std::printf("  ris %llu: beta1=%.4g K1=%.4g los=%llu\n",
                    (unsigned long long)l, ctx.ls.beta1(l), ctx.ls.k1(l),
                    (unsigned long long)ctx.ls.los_bs_ris(l));

    const arma::uword n_symbols = sc.tau_c - sc.effective_tau_p();
    for (arma::uword k = 0; k < sc.K; ++k) {
        const double err = arma::norm(ci.u_hat.col(k) - ci.ch.u.col(k)) /
                           arma::norm(ci.ch.u.col(k));
        RngStream dl = RngStream::derive(sc.seed, StreamTag::dl_symbols,
                                         ls_index, 0, k);
        const arma::cx_vec y = downlink_receive(ci.gains, k, n_symbols, dl);
        const double xi = sample_mean_power(y);
        const cx_double truth = ci.gains.alpha(k, k);
        const cx_double hb = hardening_bound_estimate(stats[k]);
        const cx_double mb = model_based_estimate(xi, stats[k]);
        std::printf(
            "  ue %llu: pos=(%.1f,%.1f) beta0=%.4g K0=%.4g los=%llu "
            "|u|=%.4g est_err=%.3f\n",
            (unsigned long long)k, ctx.ls.ue_positions(k, 0),
            ctx.ls.ue_positions(k, 1), ctx.ls.beta0(k), ctx.ls.k0(k),
            (unsigned long long)ctx.ls.los_direct(k),
            arma::norm(ci.ch.u.col(k)), err);
        std::printf(
            "        alpha_kk=%.4g%+.4gi  xi=%.6g delta=%.6g power=%.6g\n",
            truth.real(), truth.imag(), xi, stats[k].delta_k,
            stats[k].power_feature);
        std::printf(
            "        hardening=%.4g%+.4gi  model_based=%.4g%+.4gi\n",
            hb.real(), hb.imag(), mb.real(), mb.imag());
    }
    return 0;
}

int cmd_gen_dataset(const ExperimentConfig& cfg, const std::string& out,
                    const std::string& csv) {
    const Dataset ds = generate_dataset(cfg);
    save_dataset(out, ds);
    std::printf("wrote %zu records to %s\n", ds.records.size(), out.c_str());
    if (!csv.empty()) {
        export_csv(csv, ds);
        std::printf("csv export: %s\n", csv.c_str());
    }
    return 0;
}

int cmd_split(const std::string& dataset_path, const std::string& out,
              arma::uword n_train, arma::uword n_val, arma::uword n_test,
              bool flat, std::uint64_t seed_override) {
    const Dataset ds = load_dataset(dataset_path);
    const std::uint64_t seed =
        seed_override != 0 ? seed_override : ds.meta.seed;
    const SplitIndices splits =
        split_dataset(ds, n_train, n_val, n_test, seed, !flat);
    save_splits(out, splits);
    std::printf("splits: train=%llu val=%llu test=%llu -> %s\n",
                (unsigned long long)splits.train.n_elem,
                (unsigned long long)splits.val.n_elem,
                (unsigned long long)splits.test.n_elem, out.c_str());
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& dataset_path,
              const std::string& splits_path, const std::string& features,
              const std::string& out) {
    const Dataset ds = load_dataset(dataset_path);
    const SplitIndices splits = load_splits(splits_path);
    const FeatureSet set = feature_set_from_string(features);
    const arma::mat X = feature_matrix(ds, set);
    const arma::vec y = label_vector(ds);

    const std::uint64_t train_seed = mix_u64(ds.meta.seed ^ mix_u64(
        static_cast<std::uint64_t>(set)));
    RngStream init = RngStream::derive(train_seed, StreamTag::weight_init);
    MlpModel model = make_default_mlp(feature_count(set), init);
    Normalizer norm;
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch = cfg.batch;
    tc.lr = cfg.lr;
    tc.seed = train_seed;

    const auto t0 = std::chrono::steady_clock::now();
    const TrainHistory hist =
        train_mlp(model, norm, X, y, splits.train, splits.val, tc);
    const double train_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    save_checkpoint(out, model, norm);

    TimingRecord timing;
    timing.model = features;
    timing.epochs = cfg.epochs;
    timing.best_epoch = hist.best_epoch;
    timing.train_seconds = train_s;
    const auto t1 = std::chrono::steady_clock::now();
    estimator_predictions(ds, splits.test, set == FeatureSet::all4
                                               ? EstimatorKind::learned
                                               : set == FeatureSet::baseline_a
                                                     ? EstimatorKind::baseline_a
                                                     : EstimatorKind::baseline_b,
                          &model, &norm);
    timing.infer_seconds_per_100k =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t1)
            .count() *
        1e5 / static_cast<double>(std::max<arma::uword>(splits.test.n_elem, 1));
    std::printf("%s\n", timing_summary(timing).c_str());
    std::printf("final train mse %.6g, best val mse %.6g (epoch %llu) -> %s\n",
                hist.train_mse.back(), hist.best_val_mse,
                (unsigned long long)hist.best_epoch, out.c_str());
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& dataset_path,
                 const std::string& splits_path,
                 const std::vector<std::string>& estimators,
                 const std::vector<std::string>& model_args,
                 const std::string& out, arma::uword size_index) {
    const Dataset ds = load_dataset(dataset_path);
    const SplitIndices splits = load_splits(splits_path);

    std::map<EstimatorKind, std::pair<MlpModel, Normalizer>> models;
    for (const std::string& arg : model_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--model expects NAME=PATH, got " + arg);
        const EstimatorKind kind = estimator_from_string(arg.substr(0, eq));
        MlpModel m;
        Normalizer n;
        load_checkpoint(arg.substr(eq + 1), m, n);
        models.emplace(kind, std::make_pair(std::move(m), std::move(n)));
    }

    ResultTable table;
    for (const std::string& name : estimators) {
        const EstimatorKind kind = estimator_from_string(name);
        const MlpModel* model = nullptr;
        const Normalizer* norm = nullptr;
        if (estimator_is_learned(kind)) {
            auto it = models.find(kind);
            if (it == models.end())
                throw std::invalid_argument("no checkpoint given for " + name);
            model = &it->second.first;
            norm = &it->second.second;
        }
        const std::vector<cx_double> preds =
            estimator_predictions(ds, splits.test, kind, model, norm);
        RngStream boot =
            RngStream::derive(ds.meta.seed, StreamTag::bootstrap, size_index,
                              static_cast<std::uint64_t>(kind));
        const EvalOutcome eval = evaluate_nmse(
            ds, splits.test, preds, cfg.bootstrap_resamples, boot);
        ResultRow row;
        row.estimator = to_string(kind);
        row.regime = to_string(ds.meta.regime);
        row.M = ds.meta.M;
        row.N = ds.meta.N;
        row.n_test = eval.n;
        row.nmse_db = eval.nmse_db;
        row.ci_lo_db = eval.ci_lo_db;
        row.ci_hi_db = eval.ci_hi_db;
        table.rows.push_back(row);
        std::printf("%-12s M=%llu N=%llu nmse=%8.3f dB  [%8.3f, %8.3f]\n",
                    row.estimator.c_str(), (unsigned long long)row.M,
                    (unsigned long long)row.N, row.nmse_db, row.ci_lo_db,
                    row.ci_hi_db);
    }
    if (!out.empty()) {
        write_results_csv(out, table);
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
    const ResultTable table = run_experiment(cfg);
    for (const ResultRow& r : table.rows)
        std::printf("%-12s %-16s M=%-4llu N=%-4llu nmse=%8.3f dB  "
                    "[%8.3f, %8.3f]  n=%llu\n",
                    r.estimator.c_str(), r.regime.c_str(),
                    (unsigned long long)r.M, (unsigned long long)r.N,
                    r.nmse_db, r.ci_lo_db, r.ci_hi_db,
                    (unsigned long long)r.n_test);
    for (const TimingRecord& t : table.timing)
        std::printf("%s\n", timing_summary(t).c_str());
    std::printf("outputs in %s\n", cfg.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted massive MIMO link simulator and "
                 "effective-gain estimation benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    app.add_option("--config", config_path,
                   "experiment config (JSON) or scenario file (.ini)");
    app.add_option("--seed", seed_override, "override the scenario seed");

    auto* sim = app.add_subcommand("simulate",
                                   "run one coherence interval and dump it");
    arma::uword ls_index = 0;
    sim->add_option("--ls", ls_index, "large-scale realization index");

    auto* gen = app.add_subcommand("gen-dataset", "synthesize a dataset");
    std::string gen_out = "dataset.bin", gen_csv;
    gen->add_option("--out", gen_out, "output dataset file");
    gen->add_option("--csv", gen_csv, "also export CSV to this path");

    auto* spl = app.add_subcommand("split", "write train/val/test splits");
    std::string split_dataset_path = "dataset.bin", split_out = "splits.json";
    arma::uword s_train = 10000, s_val = 2500, s_test = 37500;
    bool s_flat = false;
    spl->add_option("--dataset", split_dataset_path, "dataset file");
    spl->add_option("--out", split_out, "output splits file");
    spl->add_option("--train", s_train, "training records");
    spl->add_option("--val", s_val, "validation records");
    spl->add_option("--test", s_test, "test records");
    spl->add_flag("--flat", s_flat,
                  "record-level shuffle instead of realization-level");

    auto* trn = app.add_subcommand("train", "train a regressor");
    std::string train_dataset = "dataset.bin", train_splits = "splits.json";
    std::string train_features = "all4", train_out = "model.ckpt";
    trn->add_option("--dataset", train_dataset, "dataset file");
    trn->add_option("--splits", train_splits, "splits file");
    trn->add_option("--features", train_features,
                    "all4, baseline_a or baseline_b");
    trn->add_option("--out", train_out, "checkpoint path");

    auto* ev = app.add_subcommand("evaluate",
                                  "NMSE table from stored artifacts");
    std::string eval_dataset = "dataset.bin", eval_splits = "splits.json";
    std::string eval_out;
    std::vector<std::string> eval_estimators = {"hardening", "model_based"};
    std::vector<std::string> eval_models;
    arma::uword eval_size_index = 0;
    ev->add_option("--dataset", eval_dataset, "dataset file");
    ev->add_option("--splits", eval_splits, "splits file");
    ev->add_option("--estimator", eval_estimators, "estimators to evaluate");
    ev->add_option("--model", eval_models,
                   "checkpoint for a learned estimator, NAME=PATH");
    ev->add_option("--out", eval_out, "write results.csv here");
    ev->add_option("--size-index", eval_size_index,
                   "size slot used for the bootstrap stream");

    auto* cmp = app.add_subcommand("compare", "full multi-estimator benchmark");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg =
            load_config_or_default(config_path, seed_override);
        if (sim->parsed())
            return cmd_simulate(cfg, ls_index);
        if (gen->parsed())
            return cmd_gen_dataset(cfg, gen_out, gen_csv);
        if (spl->parsed())
            return cmd_split(split_dataset_path, split_out, s_train, s_val,
                             s_test, s_flat, seed_override);
        if (trn->parsed())
            return cmd_train(cfg, train_dataset, train_splits, train_features,
                             train_out);
        if (ev->parsed())
            return cmd_evaluate(cfg, eval_dataset, eval_splits,
                                eval_estimators, eval_models, eval_out,
                                eval_size_index);
        if (cmp->parsed())
            return cmd_compare(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
