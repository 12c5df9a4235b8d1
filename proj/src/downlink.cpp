#include "risim/downlink.hpp"

#include <cmath>
#include <stdexcept>

namespace risim {

arma::cx_vec mr_precoder(const arma::cx_vec& u_hat_k, double E_norm2_uhat_k) {
    if (!(E_norm2_uhat_k > 0.0)) {
        throw std::invalid_argument("mr_precoder: E{||u_hat||^2} must be positive");
    }
    return u_hat_k / std::sqrt(E_norm2_uhat_k);
}

double expected_estimate_energy(const MmseStatistics& stats, double rho_ul,
                                arma::uword tau_p) {
    const double amp = std::sqrt(rho_ul * static_cast<double>(tau_p));
    arma::cx_mat B = amp * stats.C;
    B.diag() += 1.0;
    // y - amp*mu has covariance amp*C + I = B, so the variance part of the
    // estimate is tr(C B^{-1} B B^{-1} C) = tr(C B^{-1} C).
    arma::cx_mat X = arma::solve(B, stats.C, arma::solve_opts::likely_sympd);
    return std::pow(arma::norm(stats.mu), 2) +
           std::real(arma::trace(stats.C * X));
}

double expected_estimate_energy_mc(const LargeScaleRealization& ls,
                                   const MmseFilter& filter,
                                   const PilotBook& pilots, double rho_ul,
                                   arma::uword tau_p, arma::uword k,
                                   arma::uword n_draws, RngStream& rng) {
    double acc = 0.0;
    for (arma::uword d = 0; d < n_draws; ++d) {
        ChannelRealization ch = sample_small_scale(ls, rng);
        arma::cx_mat Yp = receive_uplink_pilots(ch, pilots, rho_ul, tau_p, rng);
        arma::cx_vec ypk = project_pilot(Yp, pilots.phi.col(k));
        arma::cx_vec u_hat = filter.apply(ypk);
        acc += std::pow(arma::norm(u_hat), 2);
    }
    return acc / static_cast<double>(n_draws);
}

PrecoderSet mr_precoder_set(const arma::cx_mat& u_hat,
                            const std::vector<MmseFilter>& filters) {
    const arma::uword K = u_hat.n_cols;
    if (filters.size() != K) {
        throw std::invalid_argument("mr_precoder_set: filter count mismatch");
    }
    PrecoderSet ps;
    ps.a.set_size(u_hat.n_rows, K);
    ps.eta = arma::vec(K, arma::fill::value(1.0 / static_cast<double>(K)));
    for (arma::uword k = 0; k < K; ++k) {
        ps.a.col(k) = mr_precoder(u_hat.col(k), filters[k].E_norm2_uhat);
    }
    return ps;
}

EffectiveGains effective_gains(const ChannelRealization& ch,
                               const PrecoderSet& precoders, double rho_d) {
    const arma::uword K = precoders.a.n_cols;
    EffectiveGains eg;
    eg.alpha.set_size(K, K);
    // u^H a for every pair, then scale column k' by sqrt(rho_d * eta_k').
    eg.alpha = ch.u.t() * precoders.a;
    for (arma::uword kp = 0; kp < K; ++kp) {
        eg.alpha.col(kp) *= std::sqrt(rho_d * precoders.eta(kp));
    }
    return eg;
}

arma::cx_vec downlink_receive(const EffectiveGains& gains, arma::uword k,
                              arma::uword n_symbols, RngStream& rng,
                              bool add_noise) {
    const arma::uword K = gains.alpha.n_cols;
    if (k >= gains.alpha.n_rows) {
        throw std::out_of_range("downlink_receive: UE index out of range");
    }
    arma::cx_vec y(n_symbols);
    for (arma::uword n = 0; n < n_symbols; ++n) {
        std::complex<double> acc = 0.0;
        for (arma::uword kp = 0; kp < K; ++kp) {
            acc += gains.alpha(k, kp) * rng.qpsk();
        }
        if (add_noise) {
            acc += rng.cgaussian();
        }
        y(n) = acc;
    }
    return y;
}

}  // namespace risim
