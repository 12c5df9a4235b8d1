#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <armadillo>

#include "risim/rng.hpp"

namespace risim {

/// Fully-connected ReLU regressor. W[i] maps layer i (width widths[i]) to
/// layer i+1; the last layer is a linear head with no activation.
struct MlpModel {
    std::vector<arma::mat> W;  // W[i]: widths[i+1] x widths[i]
    std::vector<arma::vec> b;

    arma::uword n_layers() const { return W.size(); }
    arma::uword in_dim() const { return W.empty() ? 0 : W.front().n_cols; }
    arma::uword out_dim() const { return W.empty() ? 0 : W.back().n_rows; }

    /// Weights + biases per layer, in order.
    std::vector<arma::uword> layer_param_counts() const;
    arma::uword param_count() const;
};

/// He-style uniform fan-in initialization, biases zero. widths lists every
/// layer output, e.g. {32, 64, 128, 64, 1} on top of in_dim inputs.
MlpModel make_mlp(arma::uword in_dim, const std::vector<arma::uword>& widths,
                  RngStream& rng);

/// The regression head layout used throughout: 32-64-128-64 hidden + scalar.
MlpModel make_default_mlp(arma::uword in_dim, RngStream& rng);

double mlp_forward(const MlpModel& m, const arma::vec& x);
/// Column b of X is one sample; returns one output per column.
arma::vec mlp_forward_batch(const MlpModel& m, const arma::mat& X);

struct MlpGradients {
    std::vector<arma::mat> dW;
    std::vector<arma::vec> db;
};

MlpGradients make_zero_gradients(const MlpModel& m);

/// Gradient of the squared error (out - label)^2 for one sample.
MlpGradients mlp_backward(const MlpModel& m, const arma::vec& x, double label);

/// Gradient of the batch MSE; returns the batch MSE before any update.
double mlp_backward_batch(const MlpModel& m, const arma::mat& X,
                          const arma::vec& y, MlpGradients& grads);

struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    arma::uword step = 0;
    std::vector<arma::mat> mW, vW;
    std::vector<arma::vec> mb, vb;
};

AdamState make_adam_state(const MlpModel& m, double lr = 0.01);
void adam_step(AdamState& state, MlpModel& m, const MlpGradients& grads);

/// Per-feature and label z-scoring, fitted on the training split only and
/// applied identically everywhere after.
struct Normalizer {
    arma::vec mean;
    arma::vec stdev;
    double label_mean = 0.0;
    double label_stdev = 1.0;
    bool fitted = false;

    void fit(const arma::mat& X, const arma::vec& y);
    arma::mat transform(const arma::mat& X) const;
    arma::vec transform_vec(const arma::vec& x) const;
    double transform_label(double y) const;
    double inverse_label(double yhat) const;
};

struct TrainConfig {
    arma::uword epochs = 200;
    arma::uword batch = 128;
    double lr = 0.01;
    std::uint64_t seed = 1;
};

struct TrainHistory {
    std::vector<double> train_mse;  // running loss per epoch
    std::vector<double> val_mse;
    arma::uword best_epoch = 0;
    double best_val_mse = 0.0;
};

/// Minibatch Adam training on (X, y) restricted to train_idx, validation on
/// val_idx, z-scoring fitted on the train rows. The model is left at the
/// best-validation snapshot. Deterministic for a fixed seed.
TrainHistory train_mlp(MlpModel& model, Normalizer& norm, const arma::mat& X,
                       const arma::vec& y, const arma::uvec& train_idx,
                       const arma::uvec& val_idx, const TrainConfig& cfg);

/// Normalize, run forward, de-normalize; returned as a zero-imaginary
/// complex effective-gain estimate.
std::complex<double> mlp_predict(const MlpModel& m, const Normalizer& norm,
                                 const arma::vec& raw_features);

/// Versioned binary checkpoint (widths, weights, normalizer); layout in
/// docs/formats.md.
void save_checkpoint(const std::string& path, const MlpModel& m,
                     const Normalizer& norm);
void load_checkpoint(const std::string& path, MlpModel& m, Normalizer& norm);

}  // namespace risim
