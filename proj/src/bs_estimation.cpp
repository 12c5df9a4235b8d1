#include "risim/bs_estimation.hpp"

#include <stdexcept>

namespace risim {

PilotBook PilotBook::identity(arma::uword tau_p, arma::uword K) {
    if (K > tau_p)
        throw std::invalid_argument("pilot book needs tau_p >= K");
    PilotBook book;
    book.phi.zeros(tau_p, K);
    for (arma::uword k = 0; k < K; ++k)
        book.phi(k, k) = 1.0;
    return book;
}

PilotBook PilotBook::dft(arma::uword tau_p, arma::uword K) {
    if (K > tau_p)
        throw std::invalid_argument("pilot book needs tau_p >= K");
    PilotBook book;
    book.phi.set_size(tau_p, K);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau_p));
    for (arma::uword k = 0; k < K; ++k)
        for (arma::uword t = 0; t < tau_p; ++t)
            book.phi(t, k) = scale * std::polar(1.0, -2.0 * M_PI *
                                                         static_cast<double>(t) *
                                                         static_cast<double>(k) /
                                                         static_cast<double>(tau_p));
    return book;
}

arma::cx_mat receive_uplink_pilots(const ChannelRealization& ch,
                                   const PilotBook& pilots, double rho_ul,
                                   arma::uword tau_p, RngStream& rng,
                                   bool add_noise) {
    const arma::uword M = ch.u.n_rows;
    const arma::uword K = ch.u.n_cols;
    if (pilots.phi.n_rows != tau_p || pilots.phi.n_cols != K)
        throw std::invalid_argument("pilot book does not match scenario dims");

    const double amp = std::sqrt(rho_ul * static_cast<double>(tau_p));
    arma::cx_mat Y(M, tau_p, arma::fill::zeros);
    for (arma::uword k = 0; k < K; ++k)
        Y += amp * ch.u.col(k) * pilots.phi.col(k).t();
    if (add_noise) {
        for (arma::uword t = 0; t < tau_p; ++t)
            for (arma::uword m = 0; m < M; ++m)
                Y(m, t) += rng.cgaussian();
    }
    return Y;
}

arma::cx_vec project_pilot(const arma::cx_mat& Y_p, const arma::cx_vec& phi_k) {
    if (Y_p.n_cols != phi_k.n_elem)
        throw std::invalid_argument("pilot length does not match Y_p");
    return Y_p * phi_k;
}

arma::cx_vec compute_prior_mean(const LargeScaleRealization& ls, arma::uword k) {
    arma::cx_vec mu = std::sqrt(ls.beta0_los(k)) * ls.gbar.col(k);
    for (arma::uword l = 0; l < ls.L; ++l) {
        const double s = std::sqrt(ls.beta1_los(l) * ls.beta2_los(l, k));
        if (s > 0.0)
            mu += s * (ls.Hbar[l] * (ls.phase[l] % ls.zbar[l].col(k)));
    }
    return mu;
}

MmseStatistics compute_scaled_covariance(const LargeScaleRealization& ls,
                                         arma::uword k, double rho_ul,
                                         arma::uword tau_p) {
    const arma::uword M = ls.M;
    const double amp = std::sqrt(rho_ul * static_cast<double>(tau_p));

    MmseStatistics out;
    out.mu = compute_prior_mean(ls, k);

    arma::cx_mat R(M, M, arma::fill::zeros);
    double diag = ls.beta0_nlos(k);
    for (arma::uword l = 0; l < ls.L; ++l) {
        const arma::cx_vec& nu = ls.phase[l];
        const double tr_phi2 = arma::accu(arma::square(arma::abs(nu)));
        const arma::cx_vec phi_zbar = nu % ls.zbar[l].col(k);
        diag += ls.beta1_nlos(l) * (ls.beta2_los(l, k) * arma::accu(arma::square(arma::abs(phi_zbar))) +
                                    ls.beta2_nlos(l, k) * tr_phi2);
        const double w = ls.beta1_los(l) * ls.beta2_nlos(l, k);
        if (w > 0.0) {
            const arma::cx_mat HPhi = ls.Hbar[l] * arma::diagmat(nu);
            R += w * (HPhi * HPhi.t());
        }
    }
    R.diag() += diag;

    out.R = R;
    out.C = amp * R;
    out.E_norm2_u = std::real(arma::cdot(out.mu, out.mu)) + std::real(arma::trace(R));
    return out;
}

arma::cx_vec mmse_estimate(const arma::cx_vec& y_pk, const MmseStatistics& stats,
                           double rho_ul, arma::uword tau_p) {
    const arma::uword M = stats.mu.n_elem;
    if (y_pk.n_elem != M)
        throw std::invalid_argument("observation dimension mismatch");
    const double amp = std::sqrt(rho_ul * static_cast<double>(tau_p));

    arma::cx_mat B = amp * stats.C;
    B.diag() += 1.0;
    const arma::cx_vec rhs = y_pk - amp * stats.mu;
    arma::cx_vec x;
    if (!arma::solve(x, B, rhs, arma::solve_opts::likely_sympd))
        throw std::runtime_error("mmse_estimate: linear solve failed");
    const double residual = arma::norm(B * x - rhs);
    const double scale = std::max(arma::norm(rhs), 1.0);
    if (residual > 1e-8 * scale)
        throw std::runtime_error("mmse_estimate: ill-conditioned system");
    return stats.mu + stats.C * x;
}

MmseFilter make_mmse_filter(const MmseStatistics& stats, double rho_ul,
                            arma::uword tau_p) {
    const arma::uword M = stats.mu.n_elem;
    const double amp = std::sqrt(rho_ul * static_cast<double>(tau_p));

    arma::cx_mat B = amp * stats.C;
    B.diag() += 1.0;
    arma::cx_mat X;  // B^{-1} C (Hermitian rhs)
    if (!arma::solve(X, B, stats.C, arma::solve_opts::likely_sympd))
        throw std::runtime_error("make_mmse_filter: linear solve failed");

    MmseFilter f;
    f.mu = stats.mu;
    f.A = X.t();  // A = C B^{-1}; both C and B are Hermitian
    f.sqrt_rho_tau = amp;
    // E{||u_hat||^2} = ||mu||^2 + tr(A * Cyy * A^H) with Cyy = B, and
    // A*B = C, so the trace term is tr(C A^H) = tr(C B^{-1} C).
    f.E_norm2_uhat = std::real(arma::cdot(stats.mu, stats.mu)) +
                     std::real(arma::trace(stats.C * X));
    (void)M;
    return f;
}

BsSideStatistics prepare_bs_side(const LargeScaleRealization& ls, double rho_ul,
                                 arma::uword tau_p) {
    BsSideStatistics out;
    out.stats.reserve(ls.K);
    out.filters.reserve(ls.K);
    for (arma::uword k = 0; k < ls.K; ++k) {
        out.stats.push_back(compute_scaled_covariance(ls, k, rho_ul, tau_p));
        out.filters.push_back(make_mmse_filter(out.stats.back(), rho_ul, tau_p));
    }
    return out;
}

}  // namespace risim
