#include "risim/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace risim {

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'I', 'M', 'D', 'S', '1'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("save_dataset: cannot open " + path);
    f.write(kMagic, sizeof(kMagic));
    write_pod(f, std::uint32_t{1});
    write_pod(f, ds.meta.seed);
    write_pod(f, ds.meta.config_hash);
    write_pod(f, ds.meta.M);
    write_pod(f, ds.meta.N);
    write_pod(f, ds.meta.L);
    write_pod(f, ds.meta.K);
    write_pod(f, static_cast<std::uint32_t>(ds.meta.regime));
    write_pod(f, ds.meta.ls_count);
    write_pod(f, ds.meta.ss_count);
    write_pod(f, static_cast<std::uint64_t>(ds.records.size()));
    for (const FeatureRecord& r : ds.records) {
        write_pod(f, static_cast<std::uint32_t>(r.ls_index));
        write_pod(f, static_cast<std::uint32_t>(r.ss_index));
        write_pod(f, static_cast<std::uint32_t>(r.ue));
        write_pod(f, r.xi);
        write_pod(f, r.delta);
        write_pod(f, r.power);
        write_pod(f, r.mean_alpha.real());
        write_pod(f, r.mean_alpha.imag());
        write_pod(f, r.label_alpha.real());
        write_pod(f, r.label_alpha.imag());
    }
    if (!f)
        throw std::runtime_error("save_dataset: write failed on " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    std::uint32_t version = 0;
    read_pod(f, version);
    if (version != 1)
        throw std::runtime_error("load_dataset: unsupported version");

    Dataset ds;
    std::uint32_t regime = 0;
    std::uint64_t n_records = 0;
    read_pod(f, ds.meta.seed);
    read_pod(f, ds.meta.config_hash);
    read_pod(f, ds.meta.M);
    read_pod(f, ds.meta.N);
    read_pod(f, ds.meta.L);
    read_pod(f, ds.meta.K);
    read_pod(f, regime);
    read_pod(f, ds.meta.ls_count);
    read_pod(f, ds.meta.ss_count);
    read_pod(f, n_records);
    if (regime > 2)
        throw std::runtime_error("load_dataset: bad regime field");
    ds.meta.regime = static_cast<LosRegime>(regime);

    ds.records.resize(n_records);
    for (FeatureRecord& r : ds.records) {
        std::uint32_t ls = 0, ss = 0, ue = 0;
        double mre = 0, mim = 0, lre = 0, lim = 0;
        read_pod(f, ls);
        read_pod(f, ss);
        read_pod(f, ue);
        read_pod(f, r.xi);
        read_pod(f, r.delta);
        read_pod(f, r.power);
        read_pod(f, mre);
        read_pod(f, mim);
        read_pod(f, lre);
        read_pod(f, lim);
        r.ls_index = ls;
        r.ss_index = ss;
        r.ue = ue;
        r.mean_alpha = {mre, mim};
        r.label_alpha = {lre, lim};
    }
    if (!f)
        throw std::runtime_error("load_dataset: truncated file " + path);
    return ds;
}

void export_csv(const std::string& path, const Dataset& ds) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw std::runtime_error("export_csv: cannot open " + path);
    std::fputs("ls,ss,ue,xi,delta,power,mean_alpha_re,mean_alpha_im,"
               "label_re,label_im\n", f);
    for (const FeatureRecord& r : ds.records) {
        std::fprintf(f, "%llu,%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     static_cast<unsigned long long>(r.ls_index),
                     static_cast<unsigned long long>(r.ss_index),
                     static_cast<unsigned long long>(r.ue), r.xi, r.delta,
                     r.power, r.mean_alpha.real(), r.mean_alpha.imag(),
                     r.label_alpha.real(), r.label_alpha.imag());
    }
    std::fclose(f);
}

SplitIndices split_dataset(const Dataset& ds, arma::uword n_train,
                           arma::uword n_val, arma::uword n_test,
                           std::uint64_t seed, bool by_large_scale) {
    const arma::uword total = ds.records.size();
    if (n_train + n_val + n_test > total)
        throw std::invalid_argument("split_dataset: split sizes exceed dataset");

    RngStream rng = RngStream::derive(seed, StreamTag::split);
    SplitIndices out;

    if (!by_large_scale) {
        std::vector<arma::uword> order(total);
        for (arma::uword i = 0; i < total; ++i)
            order[i] = i;
        for (arma::uword i = total; i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        out.train = arma::uvec(std::vector<arma::uword>(
            order.begin(), order.begin() + n_train));
        out.val = arma::uvec(std::vector<arma::uword>(
            order.begin() + n_train, order.begin() + n_train + n_val));
        out.test = arma::uvec(std::vector<arma::uword>(
            order.begin() + n_train + n_val,
            order.begin() + n_train + n_val + n_test));
        return out;
    }

    // Group records by large-scale realization; the file layout keeps each
    // realization contiguous with a constant record count.
    std::vector<std::pair<arma::uword, arma::uword>> groups;  // offset, size
    arma::uword start = 0;
    for (arma::uword i = 1; i <= total; ++i) {
        if (i == total || ds.records[i].ls_index != ds.records[start].ls_index) {
            groups.emplace_back(start, i - start);
            start = i;
        }
    }
    const arma::uword group_size = groups.empty() ? 0 : groups.front().second;
    for (const auto& g : groups) {
        if (g.second != group_size)
            throw std::invalid_argument(
                "split_dataset: uneven per-realization record counts");
    }
    if (group_size == 0)
        throw std::invalid_argument("split_dataset: empty dataset");
    if (n_train % group_size || n_val % group_size || n_test % group_size)
        throw std::invalid_argument(
            "split_dataset: sizes must be multiples of the per-realization "
            "record count " + std::to_string(group_size) +
            " (or use a flat split)");

    std::vector<arma::uword> order(groups.size());
    for (arma::uword i = 0; i < groups.size(); ++i)
        order[i] = i;
    for (arma::uword i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_index(i)]);

    auto take = [&](arma::uword first_group, arma::uword n_groups) {
        arma::uvec idx(n_groups * group_size);
        arma::uword w = 0;
        for (arma::uword g = 0; g < n_groups; ++g) {
            const auto& grp = groups[order[first_group + g]];
            for (arma::uword i = 0; i < grp.second; ++i)
                idx(w++) = grp.first + i;
        }
        return idx;
    };
    const arma::uword g_train = n_train / group_size;
    const arma::uword g_val = n_val / group_size;
    const arma::uword g_test = n_test / group_size;
    out.train = take(0, g_train);
    out.val = take(g_train, g_val);
    out.test = take(g_train + g_val, g_test);
    return out;
}

void save_splits(const std::string& path, const SplitIndices& splits) {
    nlohmann::json j;
    j["train"] = std::vector<arma::uword>(splits.train.begin(),
                                          splits.train.end());
    j["val"] = std::vector<arma::uword>(splits.val.begin(), splits.val.end());
    j["test"] = std::vector<arma::uword>(splits.test.begin(),
                                         splits.test.end());
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("save_splits: cannot open " + path);
    f << j.dump() << "\n";
}

SplitIndices load_splits(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("load_splits: cannot open " + path);
    nlohmann::json j;
    f >> j;
    SplitIndices out;
    out.train = arma::uvec(j.at("train").get<std::vector<arma::uword>>());
    out.val = arma::uvec(j.at("val").get<std::vector<arma::uword>>());
    out.test = arma::uvec(j.at("test").get<std::vector<arma::uword>>());
    return out;
}

arma::mat feature_matrix(const Dataset& ds, FeatureSet set) {
    arma::mat X(feature_count(set), ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        X.col(i) = feature_vector(ds.records[i], set);
    return X;
}

arma::vec label_vector(const Dataset& ds) {
    arma::vec y(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        y(i) = ds.records[i].label_alpha.real();
    return y;
}

}  // namespace risim
