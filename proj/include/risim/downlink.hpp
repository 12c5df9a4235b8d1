#pragma once

#include <armadillo>

#include "risim/bs_estimation.hpp"
#include "risim/channel_model.hpp"
#include "risim/rng.hpp"

namespace risim {

/// Maximum-ratio precoders a_k = u_hat_k / sqrt(E{||u_hat_k||^2}) and the
/// power-control coefficients (equal allocation by default).
struct PrecoderSet {
    arma::cx_mat a;  // M x K
    arma::vec eta;   // K, sum_k eta_k <= 1
};

/// alpha(k, k') = sqrt(rho_d * eta_k') * u_k^H a_k'; row k is what UE k sees.
struct EffectiveGains {
    arma::cx_mat alpha;  // K x K
};

/// Normalizes one estimate into a unit-mean-square precoder.
arma::cx_vec mr_precoder(const arma::cx_vec& u_hat_k, double E_norm2_uhat_k);

/// Closed-form E{||u_hat||^2} for the linear MMSE estimator.
double expected_estimate_energy(const MmseStatistics& stats, double rho_ul,
                                arma::uword tau_p);

/// Monte-Carlo estimate of E{||u_hat||^2}; validation fallback for the
/// closed form. Draws fresh channels and pilot noise per sample.
double expected_estimate_energy_mc(const LargeScaleRealization& ls,
                                   const MmseFilter& filter,
                                   const PilotBook& pilots, double rho_ul,
                                   arma::uword tau_p, arma::uword k,
                                   arma::uword n_draws, RngStream& rng);

/// Builds all K maximum-ratio precoders with eta_k = 1/K.
PrecoderSet mr_precoder_set(const arma::cx_mat& u_hat,
                            const std::vector<MmseFilter>& filters);

/// Effective channel gains of every (UE, stream) pair.
EffectiveGains effective_gains(const ChannelRealization& ch,
                               const PrecoderSet& precoders, double rho_d);

/// Received downlink samples of UE k over n_symbols QPSK symbols,
/// y_k(n) = sum_k' alpha(k,k') s_k'(n) + noise. Symbols are drawn i.i.d.
/// across UEs and symbols; the noise hook exists for tests.
arma::cx_vec downlink_receive(const EffectiveGains& gains, arma::uword k,
                              arma::uword n_symbols, RngStream& rng,
                              bool add_noise = true);

}  // namespace risim
