#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risim/ue_estimation.hpp"

namespace risim {

/// Generation metadata carried with every dataset file.
struct DatasetMeta {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::uint32_t M = 0, N = 0, L = 0, K = 0;
    LosRegime regime = LosRegime::probabilistic;
    std::uint64_t ls_count = 0;  // large-scale realizations
    std::uint64_t ss_count = 0;  // small-scale draws per realization
};

struct Dataset {
    DatasetMeta meta;
    std::vector<FeatureRecord> records;
};

/// Versioned little-endian binary file; layout in docs/formats.md.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

/// Plain-text view of the same records for inspection.
void export_csv(const std::string& path, const Dataset& ds);

struct SplitIndices {
    arma::uvec train, val, test;
};

/// Disjoint shuffled splits. By default whole large-scale realizations are
/// assigned to one side only (no large-scale draw leaks across splits),
/// which requires each requested size to be a multiple of the per-
/// realization record count; by_large_scale=false restores a flat record
/// shuffle.
SplitIndices split_dataset(const Dataset& ds, arma::uword n_train,
                           arma::uword n_val, arma::uword n_test,
                           std::uint64_t seed, bool by_large_scale = true);

void save_splits(const std::string& path, const SplitIndices& splits);
SplitIndices load_splits(const std::string& path);

/// Feature columns (one per record) for the chosen feature subset.
arma::mat feature_matrix(const Dataset& ds, FeatureSet set);
/// Training target: the real part of the effective gain.
arma::vec label_vector(const Dataset& ds);

}  // namespace risim
