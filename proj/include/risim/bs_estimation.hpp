#pragma once

#include <armadillo>
#include <vector>

#include "risim/channel_model.hpp"
#include "risim/rng.hpp"

namespace risim {

/// Mutually orthonormal pilot sequences, one column per UE.
struct PilotBook {
    arma::cx_mat phi;  // tau_p x K, phi_k^H phi_k = 1, phi_k^H phi_k' = 0

    /// Identity columns: exactly orthonormal in floating point.
    static PilotBook identity(arma::uword tau_p, arma::uword K);
    /// Scaled DFT columns; orthonormal to machine precision.
    static PilotBook dft(arma::uword tau_p, arma::uword K);
};

/// Prior statistics of the aggregated channel u_k needed by the linear MMSE
/// estimator: mu is the mean, C the scaled covariance, R = C/sqrt(rho*tau_p)
/// the covariance of u_k itself, and E_norm2_u = ||mu||^2 + tr(R).
struct MmseStatistics {
    arma::cx_vec mu;
    arma::cx_mat C;
    arma::cx_mat R;
    double E_norm2_u = 0.0;
};

/// Precomputed estimation operator u_hat = mu + A*(y - sqrt(rho*tau_p)*mu).
/// Factoring the solve out of the per-fade path; apply() matches
/// mmse_estimate() to solver precision.
struct MmseFilter {
    arma::cx_vec mu;
    arma::cx_mat A;
    double sqrt_rho_tau = 0.0;
    double E_norm2_uhat = 0.0;  // closed-form E{||u_hat||^2}

    arma::cx_vec apply(const arma::cx_vec& y_pk) const {
        return mu + A * (y_pk - sqrt_rho_tau * mu);
    }
};

/// Uplink pilot reception Y_p = sum_k sqrt(rho*tau_p) u_k phi_k^H + W_p.
/// The noise hook exists for tests that need the noiseless signal.
arma::cx_mat receive_uplink_pilots(const ChannelRealization& ch,
                                   const PilotBook& pilots, double rho_ul,
                                   arma::uword tau_p, RngStream& rng,
                                   bool add_noise = true);

/// Despreading onto pilot k: y_pk = Y_p phi_k.
arma::cx_vec project_pilot(const arma::cx_mat& Y_p, const arma::cx_vec& phi_k);

/// Prior mean of the aggregated channel of UE k.
arma::cx_vec compute_prior_mean(const LargeScaleRealization& ls, arma::uword k);

/// Prior mean, scaled covariance and derived statistics of u_k.
MmseStatistics compute_scaled_covariance(const LargeScaleRealization& ls,
                                         arma::uword k, double rho_ul,
                                         arma::uword tau_p);

/// Linear MMSE estimate
/// u_hat = mu + C (sqrt(rho*tau_p) C + I)^{-1} (y_pk - sqrt(rho*tau_p) mu),
/// implemented as a linear solve. Throws if the solve residual indicates an
/// ill-conditioned system.
arma::cx_vec mmse_estimate(const arma::cx_vec& y_pk, const MmseStatistics& stats,
                           double rho_ul, arma::uword tau_p);

/// Builds the precomputed filter, including E{||u_hat||^2} in closed form.
MmseFilter make_mmse_filter(const MmseStatistics& stats, double rho_ul,
                            arma::uword tau_p);

/// Per-UE statistics and filters for one large-scale realization.
struct BsSideStatistics {
    std::vector<MmseStatistics> stats;
    std::vector<MmseFilter> filters;
};

BsSideStatistics prepare_bs_side(const LargeScaleRealization& ls, double rho_ul,
                                 arma::uword tau_p);

}  // namespace risim
