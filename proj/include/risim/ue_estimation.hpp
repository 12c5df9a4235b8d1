#pragma once

#include <string>
#include <vector>

#include "risim/link_simulation.hpp"

namespace risim {

/// Channel statistics known at UE k: mean effective gain, mean
/// interference-plus-noise power, and the transmit-side power feature
/// rho_d * eta_k * E{||u_k||^2}. The expectations are Monte-Carlo estimates
/// over fresh small-scale draws (the simulator stands in for whatever
/// mechanism provides the UE with its statistics).
struct UeStatistics {
    cx_double mean_alpha_kk = 0.0;
    double delta_k = 1.0;       // >= 1, the +1 is the unit noise floor
    double power_feature = 0.0;
    arma::uword mc_samples = 0;
};

/// xi_k = (1/n) sum_n |y_k(n)|^2.
double sample_mean_power(const arma::cx_vec& y);

/// Genie statistics for every UE of one large-scale realization, estimated
/// from mc_samples independent full-chain draws (streams
/// (seed, genie, ls_index, draw)).
std::vector<UeStatistics> compute_ue_statistics(const LinkContext& ctx,
                                                arma::uword mc_samples);

/// delta_k alone: E{sum_{k'!=k} |alpha_kk'|^2} + 1.
double interference_noise_power(const LinkContext& ctx, arma::uword k,
                                arma::uword mc_samples);

/// Estimate by the statistical mean E{alpha_kk}.
cx_double hardening_bound_estimate(const UeStatistics& stats);

/// Blind estimate sqrt(xi - delta) when xi > delta, mean fallback otherwise.
cx_double model_based_estimate(double xi_k, const UeStatistics& stats);

/// One labeled sample of the UE-side estimation problem.
struct FeatureRecord {
    arma::uword ls_index = 0;
    arma::uword ss_index = 0;
    arma::uword ue = 0;
    double xi = 0.0;              // feature (i)
    double delta = 0.0;           // feature (ii)
    double power = 0.0;           // feature (iii)
    cx_double mean_alpha = 0.0;   // |.| is feature (iv); also the mean estimate
    cx_double label_alpha = 0.0;  // realized alpha_kk

    double mean_alpha_mag() const { return std::abs(mean_alpha); }
};

FeatureRecord build_feature_record(double xi_k, const UeStatistics& stats,
                                   cx_double label_alpha);

/// Which features feed the regressor: the full 4-vector or one of the
/// 3-feature baselines (A drops the mean-gain feature, B drops the power
/// feature).
enum class FeatureSet { all4, baseline_a, baseline_b };

std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& name);
arma::uword feature_count(FeatureSet set);

/// Feature vector of a record in the fixed order (i),(ii),(iii),(iv) with
/// the dropped coordinate removed for the baselines.
arma::vec feature_vector(const FeatureRecord& rec, FeatureSet set);

/// 10 log10( sum |a - a_hat|^2 / sum |a|^2 ), floored at floor_db for the
/// all-exact case.
double nmse_db(const std::vector<cx_double>& estimates,
               const std::vector<cx_double>& truths, double floor_db = -300.0);

}  // namespace risim
