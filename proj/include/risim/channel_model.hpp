#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

#include "risim/rng.hpp"

namespace risim {

using cx_double = arma::cx_double;

/// Phase-shift element model: nu = a(theta) * exp(j*theta) with the
/// circuit-dependent amplitude a(theta) = (1-a_min)*((sin(theta-phi)+1)/2)^b + a_min.
struct PhaseShiftConfig {
    double a_min = 0.2;
    double b = 1.6;
    double phi = 0.43 * M_PI;
    arma::mat theta;  // L x N element phases in [-pi, pi); drawn from the
                      // scenario seed when left empty
};

/// Distance-parameterized large-scale models, all configurable. Path loss is
/// log-distance in dB, LoS probability is urban-micro style, and the Rician
/// K-factor is linear in distance on the dB scale.
struct PathLossConfig {
    double los_intercept_db = -30.18;
    double los_slope_db = 26.0;  // dB per decade of distance
    double nlos_intercept_db = -34.53;
    double nlos_slope_db = 38.0;
    double k_intercept_db = 13.0;
    double k_slope_db_per_m = 0.03;
    double los_prob_cutoff_m = 18.0;
    double los_prob_decay_m = 36.0;
    double noise_power_dbm = -92.0;

    double los_pathloss_db(double d) const;
    double nlos_pathloss_db(double d) const;
    double los_probability(double d) const;
    /// Linear K-factor at distance d (for links whose LoS flag is set).
    double rician_k(double d) const;
};

/// How per-link LoS existence is decided when sampling large-scale fading.
enum class LosRegime {
    probabilistic,   // Bernoulli draw per link from los_probability(d)
    los_dominated,   // every link LoS, K-factors boosted by los_k_boost_db
    nlos_dominated,  // every link NLoS (Rayleigh)
};

std::string to_string(LosRegime regime);
LosRegime los_regime_from_string(const std::string& name);

/// Geometry and radio parameters for one simulated cell.
struct Scenario {
    arma::uword M = 40;  // BS antennas
    arma::uword N = 25;  // elements per RIS
    arma::uword L = 2;   // RIS count
    arma::uword K = 10;  // UEs

    arma::vec::fixed<2> bs_position{0.0, 0.0};
    arma::mat ris_positions;              // L x 2, defaults to (10,30), (10,-30)
    arma::vec::fixed<4> ue_area{150.0, 250.0, -50.0, 50.0};  // x0 x1 y0 y1
    double altitude_gap = 10.0;           // BS/RIS height above the UE plane

    double d_B_over_lambda = 0.5;
    double d_R_over_lambda = 0.25;
    arma::uword nx_override = 0;          // 0: N_x = min(N,5); otherwise N_x

    double rho_ul = 0.0;                  // normalized uplink pilot SNR, linear
    double rho_d = 0.0;                   // normalized downlink SNR, linear
    arma::uword tau_c = 500;
    arma::uword tau_p = 0;                // 0: use K

    LosRegime regime = LosRegime::probabilistic;
    double los_k_boost_db = 10.0;         // extra K-factor in los_dominated mode
    bool bs_ris_los = true;               // BS-RIS links placed for LoS

    PhaseShiftConfig phase;
    PathLossConfig pathloss;
    std::uint64_t seed = 1;

    /// Fills derived defaults (tau_p, RIS positions, element phases, SNRs
    /// from the standard powers if unset) and checks invariants.
    void finalize();
    void validate() const;

    arma::uword effective_tau_p() const { return tau_p == 0 ? K : tau_p; }
    arma::uword nx() const {
        return nx_override > 0 ? nx_override : std::min<arma::uword>(N, 5);
    }
};

/// Everything that stays fixed while small-scale fading varies: link gains,
/// Rician splits, LoS steering components and the RIS phase matrices.
struct LargeScaleRealization {
    arma::uword M = 0, N = 0, L = 0, K = 0;
    arma::mat ue_positions;  // K x 2

    arma::vec beta0, k0;            // K: direct link gain, K-factor (linear)
    arma::vec beta1, k1;            // L: BS-RIS
    arma::mat beta2, k2;            // L x K: RIS-UE
    arma::uvec los_direct;          // K
    arma::uvec los_bs_ris;          // L
    arma::umat los_ris_ue;          // L x K

    // Rician power splits, beta_los + beta_nlos == beta exactly
    arma::vec beta0_los, beta0_nlos;
    arma::vec beta1_los, beta1_nlos;
    arma::mat beta2_los, beta2_nlos;

    arma::cx_mat gbar;                // M x K unit-modulus LoS directions
    std::vector<arma::cx_mat> Hbar;   // L of M x N
    std::vector<arma::cx_mat> zbar;   // L of N x K
    std::vector<arma::cx_vec> phase;  // L of N, diag of Phi_ell
};

/// One small-scale draw of all channels plus the aggregated channel.
struct ChannelRealization {
    arma::cx_mat g;                // M x K
    std::vector<arma::cx_mat> H;   // L of M x N
    std::vector<arma::cx_mat> z;   // L of N x K
    arma::cx_mat u;                // M x K, u_k = g_k + sum_l H_l Phi_l z_lk
};

/// ULA response: entry m (1-based) is exp(j*2*pi*(m-1)*spacing*sin(theta)).
arma::cx_vec steering_ula(arma::uword M, double theta, double spacing_ratio);

/// UPA response with N_x elements per row, 0-based element index:
/// exp(j*2*pi*spacing*(floor(n/N_x)*sin(psi)*sin(theta) + (n mod N_x)*sin(psi)*cos(theta))).
arma::cx_vec steering_upa(arma::uword N, double theta, double psi,
                          double spacing_ratio, arma::uword n_x);

/// Reflection amplitude a(theta) in [a_min, 1].
double phase_amplitude(double theta, const PhaseShiftConfig& cfg);

/// Diagonal phase matrix of RIS ell from the configured element phases.
arma::cx_mat build_phase_matrix(const PhaseShiftConfig& cfg, arma::uword ell);

/// Draws UE positions, LoS flags, link gains and LoS components.
LargeScaleRealization sample_large_scale(const Scenario& sc, RngStream& rng);

/// Draws one small-scale fading realization and assembles u_k.
ChannelRealization sample_small_scale(const LargeScaleRealization& ls,
                                      RngStream& rng);

}  // namespace risim
