#include "risim/ue_estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace risim {

double sample_mean_power(const arma::cx_vec& y) {
    if (y.is_empty())
        throw std::invalid_argument("sample_mean_power: empty input");
    double acc = 0.0;
    for (arma::uword n = 0; n < y.n_elem; ++n)
        acc += std::norm(y(n));
    return acc / static_cast<double>(y.n_elem);
}

std::vector<UeStatistics> compute_ue_statistics(const LinkContext& ctx,
                                                arma::uword mc_samples) {
    if (mc_samples == 0)
        throw std::invalid_argument("compute_ue_statistics: need mc_samples >= 1");
    const arma::uword K = ctx.sc.K;

    arma::cx_vec mean_diag(K, arma::fill::zeros);
    arma::vec mean_interf(K, arma::fill::zeros);
    for (arma::uword d = 0; d < mc_samples; ++d) {
        RngStream rng = RngStream::derive(ctx.sc.seed, StreamTag::genie,
                                          ctx.ls_index, d);
        CoherenceInterval ci = run_coherence_interval(ctx, rng);
        for (arma::uword k = 0; k < K; ++k) {
            mean_diag(k) += ci.gains.alpha(k, k);
            for (arma::uword kp = 0; kp < K; ++kp) {
                if (kp != k)
                    mean_interf(k) += std::norm(ci.gains.alpha(k, kp));
            }
        }
    }
    mean_diag /= static_cast<double>(mc_samples);
    mean_interf /= static_cast<double>(mc_samples);

    std::vector<UeStatistics> out(K);
    for (arma::uword k = 0; k < K; ++k) {
        out[k].mean_alpha_kk = mean_diag(k);
        out[k].delta_k = mean_interf(k) + 1.0;
        out[k].power_feature = ctx.sc.rho_d * (1.0 / static_cast<double>(K)) *
                               ctx.bs.stats[k].E_norm2_u;
        out[k].mc_samples = mc_samples;
    }
    return out;
}

double interference_noise_power(const LinkContext& ctx, arma::uword k,
                                arma::uword mc_samples) {
    return compute_ue_statistics(ctx, mc_samples).at(k).delta_k;
}

cx_double hardening_bound_estimate(const UeStatistics& stats) {
    return stats.mean_alpha_kk;
}

cx_double model_based_estimate(double xi_k, const UeStatistics& stats) {
    if (xi_k > stats.delta_k)
        return cx_double(std::sqrt(xi_k - stats.delta_k), 0.0);
    return stats.mean_alpha_kk;
}

FeatureRecord build_feature_record(double xi_k, const UeStatistics& stats,
                                   cx_double label_alpha) {
    if (!std::isfinite(xi_k) || !std::isfinite(stats.delta_k) ||
        !std::isfinite(stats.power_feature) ||
        !std::isfinite(std::abs(stats.mean_alpha_kk)) ||
        !std::isfinite(std::abs(label_alpha)))
        throw std::invalid_argument("build_feature_record: non-finite input");
    FeatureRecord rec;
    rec.xi = xi_k;
    rec.delta = stats.delta_k;
    rec.power = stats.power_feature;
    rec.mean_alpha = stats.mean_alpha_kk;
    rec.label_alpha = label_alpha;
    return rec;
}

std::string to_string(FeatureSet set) {
    switch (set) {
        case FeatureSet::all4: return "all4";
        case FeatureSet::baseline_a: return "baseline_a";
        case FeatureSet::baseline_b: return "baseline_b";
    }
    throw std::invalid_argument("unknown feature set");
}

FeatureSet feature_set_from_string(const std::string& name) {
    if (name == "all4") return FeatureSet::all4;
    if (name == "baseline_a") return FeatureSet::baseline_a;
    if (name == "baseline_b") return FeatureSet::baseline_b;
    throw std::invalid_argument("unknown feature set: " + name);
}

arma::uword feature_count(FeatureSet set) {
    return set == FeatureSet::all4 ? 4 : 3;
}

arma::vec feature_vector(const FeatureRecord& rec, FeatureSet set) {
    switch (set) {
        case FeatureSet::all4:
            return {rec.xi, rec.delta, rec.power, rec.mean_alpha_mag()};
        case FeatureSet::baseline_a:  // drops (iv)
            return {rec.xi, rec.delta, rec.power};
        case FeatureSet::baseline_b:  // drops (iii)
            return {rec.xi, rec.delta, rec.mean_alpha_mag()};
    }
    throw std::invalid_argument("unknown feature set");
}

double nmse_db(const std::vector<cx_double>& estimates,
               const std::vector<cx_double>& truths, double floor_db) {
    if (estimates.size() != truths.size() || truths.empty())
        throw std::invalid_argument("nmse_db: size mismatch or empty");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        num += std::norm(truths[i] - estimates[i]);
        den += std::norm(truths[i]);
    }
    if (den <= 0.0)
        throw std::invalid_argument("nmse_db: all-zero truths");
    if (num <= 0.0)
        return floor_db;
    return std::max(10.0 * std::log10(num / den), floor_db);
}

}  // namespace risim
