#pragma once

#include <string>
#include <vector>

#include "risim/dataset.hpp"
#include "risim/neural.hpp"

namespace risim {

struct SizePair {
    arma::uword M = 40;
    arma::uword N = 25;
};

/// Everything a benchmark run needs: the scenario template, array sizes to
/// sweep, dataset/split/training shape, estimators to compare, output paths.
struct ExperimentConfig {
    Scenario scenario;
    std::vector<SizePair> sizes = {{40, 25}};
    arma::uword ls_count = 200;   // large-scale realizations
    arma::uword ss_count = 250;   // small-scale draws per realization
    arma::uword n_train = 10000;  // records (20% of the default 50k)
    arma::uword n_val = 2500;     //  5%
    arma::uword n_test = 37500;   // 75%
    bool flat_split = false;      // record-level shuffle instead of
                                  // realization-level
    arma::uword epochs = 40;
    arma::uword batch = 128;
    double lr = 0.01;
    arma::uword genie_samples = 1000;
    arma::uword bootstrap_resamples = 1000;
    std::vector<std::string> estimators = {"hardening", "model_based",
                                           "learned", "baseline_A",
                                           "baseline_B"};
    std::string out_dir = ".";

    void validate() const;
};

enum class EstimatorKind { hardening, model_based, learned, baseline_a, baseline_b };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);
/// Feature subset feeding the regressor; throws for the statistics-only
/// estimators.
FeatureSet estimator_feature_set(EstimatorKind kind);
bool estimator_is_learned(EstimatorKind kind);

struct ResultRow {
    std::string estimator;
    std::string regime;
    arma::uword M = 0, N = 0;
    arma::uword n_test = 0;
    double nmse_db = 0.0;
    double ci_lo_db = 0.0;  // 95% bootstrap percentile interval
    double ci_hi_db = 0.0;
};

struct TimingRecord {
    std::string model;  // estimator name + size
    arma::uword epochs = 0;
    arma::uword best_epoch = 0;
    double train_seconds = 0.0;
    double infer_seconds_per_100k = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<TimingRecord> timing;
};

/// Synthesizes the labeled dataset for cfg.scenario's (M, N): for every
/// large-scale realization, genie statistics once, then one record per
/// small-scale draw for the typical UE.
Dataset generate_dataset(const ExperimentConfig& cfg);

/// Point NMSE plus a 95% bootstrap interval, resampling whole large-scale
/// realizations so the interval respects the clustered draws.
struct EvalOutcome {
    double nmse_db = 0.0;
    double ci_lo_db = 0.0;
    double ci_hi_db = 0.0;
    arma::uword n = 0;
};

/// Predictions of one estimator on the given records. Learned estimators
/// need their model and normalizer; the statistics-based ones ignore them.
std::vector<cx_double> estimator_predictions(const Dataset& ds,
                                             const arma::uvec& idx,
                                             EstimatorKind kind,
                                             const MlpModel* model,
                                             const Normalizer* norm);

EvalOutcome evaluate_nmse(const Dataset& ds, const arma::uvec& test_idx,
                          const std::vector<cx_double>& predictions,
                          arma::uword bootstrap_resamples, RngStream& rng);

/// Full benchmark: per (M, N) generate the dataset, split, train the
/// requested learned estimators, evaluate everything on the test split, and
/// write results.csv + manifest.json (plus dataset/checkpoint files) into
/// cfg.out_dir.
ResultTable run_experiment(const ExperimentConfig& cfg);

/// Deterministic CSV (no wall-clock content).
void write_results_csv(const std::string& path, const ResultTable& table);

/// Timing as a manifest fragment (reported, never asserted).
std::string timing_summary(const TimingRecord& rec);

}  // namespace risim
