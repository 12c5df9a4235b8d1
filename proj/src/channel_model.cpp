#include "risim/channel_model.hpp"

#include <cmath>
#include <stdexcept>

namespace risim {

double PathLossConfig::los_pathloss_db(double d) const {
    return los_intercept_db - los_slope_db * std::log10(d);
}

double PathLossConfig::nlos_pathloss_db(double d) const {
    return nlos_intercept_db - nlos_slope_db * std::log10(d);
}

double PathLossConfig::los_probability(double d) const {
    if (d <= 0.0)
        return 1.0;
    const double e = std::exp(-d / los_prob_decay_m);
    const double p = std::min(los_prob_cutoff_m / d, 1.0) * (1.0 - e) + e;
    return std::min(p, 1.0);
}

double PathLossConfig::rician_k(double d) const {
    return std::pow(10.0, (k_intercept_db - k_slope_db_per_m * d) / 10.0);
}

std::string to_string(LosRegime regime) {
    switch (regime) {
        case LosRegime::probabilistic: return "probabilistic";
        case LosRegime::los_dominated: return "los_dominated";
        case LosRegime::nlos_dominated: return "nlos_dominated";
    }
    return "unknown";
}

LosRegime los_regime_from_string(const std::string& name) {
    if (name == "probabilistic") return LosRegime::probabilistic;
    if (name == "los_dominated" || name == "los") return LosRegime::los_dominated;
    if (name == "nlos_dominated" || name == "nlos") return LosRegime::nlos_dominated;
    throw std::invalid_argument("unknown LoS regime: " + name);
}

void Scenario::finalize() {
    if (tau_p == 0)
        tau_p = K;
    if (ris_positions.n_rows != L) {
        // RISs near the BS, alternating above/below the x-axis
        ris_positions.set_size(L, 2);
        for (arma::uword l = 0; l < L; ++l) {
            const double offset = 30.0 * static_cast<double>(l / 2 + 1);
            ris_positions(l, 0) = 10.0;
            ris_positions(l, 1) = (l % 2 == 0) ? offset : -offset;
        }
    }
    const double noise_w = std::pow(10.0, (pathloss.noise_power_dbm - 30.0) / 10.0);
    if (rho_ul <= 0.0)
        rho_ul = 0.1 / noise_w;  // 0.1 W uplink pilot power
    if (rho_d <= 0.0)
        rho_d = 10.0 / noise_w;  // 10 W downlink power
    if (phase.theta.n_rows != L || phase.theta.n_cols != N) {
        RngStream rng = RngStream::derive(seed, StreamTag::phase_init);
        phase.theta.set_size(L, N);
        for (arma::uword l = 0; l < L; ++l)
            for (arma::uword n = 0; n < N; ++n)
                phase.theta(l, n) = rng.uniform(-M_PI, M_PI);
    }
    validate();
}

void Scenario::validate() const {
    if (M < 1 || N < 1 || K < 1)
        throw std::invalid_argument("scenario requires M, N, K >= 1");
    if (!(K <= tau_p && tau_p <= tau_c))
        throw std::invalid_argument("scenario requires K <= tau_p <= tau_c");
    if (rho_ul <= 0.0 || rho_d <= 0.0)
        throw std::invalid_argument("normalized SNRs must be positive");
    if (phase.a_min < 0.0 || phase.a_min > 1.0 || phase.b < 0.0 || phase.phi < 0.0)
        throw std::invalid_argument("invalid phase-shift model constants");
    if (L > 0 && (phase.theta.n_rows != L || phase.theta.n_cols != N))
        throw std::invalid_argument("phase.theta must be L x N");
    if (ue_area(1) <= ue_area(0) || ue_area(3) <= ue_area(2))
        throw std::invalid_argument("degenerate UE area");
}

arma::cx_vec steering_ula(arma::uword M, double theta, double spacing_ratio) {
    arma::cx_vec a(M);
    const double step = 2.0 * M_PI * spacing_ratio * std::sin(theta);
    for (arma::uword m = 0; m < M; ++m)
        a(m) = std::polar(1.0, step * static_cast<double>(m));
    return a;
}

arma::cx_vec steering_upa(arma::uword N, double theta, double psi,
                          double spacing_ratio, arma::uword n_x) {
    arma::cx_vec a(N);
    const double row_term = std::sin(psi) * std::sin(theta);
    const double col_term = std::sin(psi) * std::cos(theta);
    for (arma::uword n = 0; n < N; ++n) {
        const double row = static_cast<double>(n / n_x);
        const double col = static_cast<double>(n - (n / n_x) * n_x);
        a(n) = std::polar(1.0, 2.0 * M_PI * spacing_ratio * (row * row_term + col * col_term));
    }
    return a;
}

double phase_amplitude(double theta, const PhaseShiftConfig& cfg) {
    const double s = (std::sin(theta - cfg.phi) + 1.0) / 2.0;
    return (1.0 - cfg.a_min) * std::pow(s, cfg.b) + cfg.a_min;
}

arma::cx_mat build_phase_matrix(const PhaseShiftConfig& cfg, arma::uword ell) {
    if (ell >= cfg.theta.n_rows)
        throw std::out_of_range("RIS index out of range");
    const arma::uword N = cfg.theta.n_cols;
    arma::cx_vec nu(N);
    for (arma::uword n = 0; n < N; ++n) {
        const double th = cfg.theta(ell, n);
        nu(n) = std::polar(phase_amplitude(th, cfg), th);
    }
    return arma::diagmat(nu);
}

namespace {

double link_distance(const arma::vec& a, const arma::vec& b, double altitude_gap) {
    const double dx = a(0) - b(0);
    const double dy = a(1) - b(1);
    return std::sqrt(dx * dx + dy * dy + altitude_gap * altitude_gap);
}

// Splits beta into LoS/NLoS parts that sum to beta exactly.
void rician_split(double beta, double k, double& beta_los, double& beta_nlos) {
    beta_nlos = std::isinf(k) ? 0.0 : beta / (k + 1.0);
    beta_los = beta - beta_nlos;
}

struct LinkDraw {
    bool los;
    double beta;
    double k;
};

LinkDraw draw_link(const Scenario& sc, double d, bool force_los, RngStream& rng) {
    if (d <= 0.0)
        throw std::invalid_argument("degenerate geometry: zero link distance");
    LinkDraw out{};
    switch (sc.regime) {
        case LosRegime::los_dominated: out.los = true; break;
        case LosRegime::nlos_dominated: out.los = false; break;
        case LosRegime::probabilistic:
            out.los = force_los || rng.bernoulli(sc.pathloss.los_probability(d));
            break;
    }
    const double pl_db = out.los ? sc.pathloss.los_pathloss_db(d)
                                 : sc.pathloss.nlos_pathloss_db(d);
    out.beta = std::pow(10.0, pl_db / 10.0);
    out.k = 0.0;
    if (out.los) {
        out.k = sc.pathloss.rician_k(d);
        if (sc.regime == LosRegime::los_dominated)
            out.k *= std::pow(10.0, sc.los_k_boost_db / 10.0);
    }
    return out;
}

}  // namespace

LargeScaleRealization sample_large_scale(const Scenario& sc, RngStream& rng) {
    sc.validate();
    const arma::uword M = sc.M, N = sc.N, L = sc.L, K = sc.K;

    LargeScaleRealization ls;
    ls.M = M;
    ls.N = N;
    ls.L = L;
    ls.K = K;

    ls.ue_positions.set_size(K, 2);
    for (arma::uword k = 0; k < K; ++k) {
        ls.ue_positions(k, 0) = rng.uniform(sc.ue_area(0), sc.ue_area(1));
        ls.ue_positions(k, 1) = rng.uniform(sc.ue_area(2), sc.ue_area(3));
    }

    ls.beta0.set_size(K); ls.k0.set_size(K);
    ls.beta1.set_size(L); ls.k1.set_size(L);
    ls.beta2.set_size(L, K); ls.k2.set_size(L, K);
    ls.los_direct.set_size(K);
    ls.los_bs_ris.set_size(L);
    ls.los_ris_ue.set_size(L, K);
    ls.beta0_los.set_size(K); ls.beta0_nlos.set_size(K);
    ls.beta1_los.set_size(L); ls.beta1_nlos.set_size(L);
    ls.beta2_los.set_size(L, K); ls.beta2_nlos.set_size(L, K);

    const arma::vec bs = sc.bs_position;

    // direct BS-UE links
    ls.gbar.set_size(M, K);
    for (arma::uword k = 0; k < K; ++k) {
        const arma::vec ue = ls.ue_positions.row(k).t();
        const double d = link_distance(bs, ue, sc.altitude_gap);
        const LinkDraw link = draw_link(sc, d, false, rng);
        ls.los_direct(k) = link.los;
        ls.beta0(k) = link.beta;
        ls.k0(k) = link.k;
        rician_split(link.beta, link.k, ls.beta0_los(k), ls.beta0_nlos(k));
        const double az = std::atan2(ue(1) - bs(1), ue(0) - bs(0));
        ls.gbar.col(k) = steering_ula(M, az, sc.d_B_over_lambda);
    }

    ls.Hbar.resize(L);
    ls.zbar.resize(L);
    ls.phase.resize(L);
    for (arma::uword l = 0; l < L; ++l) {
        const arma::vec ris = sc.ris_positions.row(l).t();

        // BS-RIS link; BS and RIS share the same altitude
        const double d_br = link_distance(bs, ris, 0.0);
        const LinkDraw link1 = draw_link(sc, d_br, sc.bs_ris_los, rng);
        ls.los_bs_ris(l) = link1.los;
        ls.beta1(l) = link1.beta;
        ls.k1(l) = link1.k;
        rician_split(link1.beta, link1.k, ls.beta1_los(l), ls.beta1_nlos(l));

        // Hbar = a_B(departure azimuth) a_R(arrival azimuth, elevation)^H
        const double az_dep = std::atan2(ris(1) - bs(1), ris(0) - bs(0));
        const double az_arr = std::atan2(bs(1) - ris(1), bs(0) - ris(0));
        const arma::cx_vec a_b = steering_ula(M, az_dep, sc.d_B_over_lambda);
        const arma::cx_vec a_r = steering_upa(N, az_arr, 0.0, sc.d_R_over_lambda, sc.nx());
        ls.Hbar[l] = a_b * a_r.t();

        // RIS-UE links; UEs sit altitude_gap below the RIS plane
        ls.zbar[l].set_size(N, K);
        for (arma::uword k = 0; k < K; ++k) {
            const arma::vec ue = ls.ue_positions.row(k).t();
            const double horiz = std::hypot(ue(0) - ris(0), ue(1) - ris(1));
            const double d_ru = link_distance(ris, ue, sc.altitude_gap);
            const LinkDraw link2 = draw_link(sc, d_ru, false, rng);
            ls.los_ris_ue(l, k) = link2.los;
            ls.beta2(l, k) = link2.beta;
            ls.k2(l, k) = link2.k;
            rician_split(link2.beta, link2.k, ls.beta2_los(l, k), ls.beta2_nlos(l, k));
            const double az = std::atan2(ue(1) - ris(1), ue(0) - ris(0));
            const double el = std::atan2(-sc.altitude_gap, horiz);
            ls.zbar[l].col(k) = steering_upa(N, az, el, sc.d_R_over_lambda, sc.nx());
        }

        arma::cx_vec nu(N);
        for (arma::uword n = 0; n < N; ++n) {
            const double th = sc.phase.theta(l, n);
            nu(n) = std::polar(phase_amplitude(th, sc.phase), th);
        }
        ls.phase[l] = nu;
    }
    return ls;
}

ChannelRealization sample_small_scale(const LargeScaleRealization& ls,
                                      RngStream& rng) {
    const arma::uword M = ls.M, N = ls.N, L = ls.L, K = ls.K;

    ChannelRealization ch;
    ch.g.set_size(M, K);
    ch.H.resize(L);
    ch.z.resize(L);

    // Draw order is fixed: g, then H_0..H_{L-1}, then z_0..z_{L-1},
    // column-major within each matrix.
    for (arma::uword k = 0; k < K; ++k) {
        const double s_los = std::sqrt(ls.beta0_los(k));
        const double s_nlos = std::sqrt(ls.beta0_nlos(k));
        for (arma::uword m = 0; m < M; ++m)
            ch.g(m, k) = s_los * ls.gbar(m, k) + s_nlos * rng.cgaussian();
    }
    for (arma::uword l = 0; l < L; ++l) {
        ch.H[l].set_size(M, N);
        const double s_los = std::sqrt(ls.beta1_los(l));
        const double s_nlos = std::sqrt(ls.beta1_nlos(l));
        for (arma::uword n = 0; n < N; ++n)
            for (arma::uword m = 0; m < M; ++m)
                ch.H[l](m, n) = s_los * ls.Hbar[l](m, n) + s_nlos * rng.cgaussian();
    }
    for (arma::uword l = 0; l < L; ++l) {
        ch.z[l].set_size(N, K);
        for (arma::uword k = 0; k < K; ++k) {
            const double s_los = std::sqrt(ls.beta2_los(l, k));
            const double s_nlos = std::sqrt(ls.beta2_nlos(l, k));
            for (arma::uword n = 0; n < N; ++n)
                ch.z[l](n, k) = s_los * ls.zbar[l](n, k) + s_nlos * rng.cgaussian();
        }
    }

    ch.u = ch.g;
    for (arma::uword l = 0; l < L; ++l) {
        arma::cx_mat zp = ch.z[l];
        zp.each_col() %= ls.phase[l];
        ch.u += ch.H[l] * zp;
    }
    return ch;
}

}  // namespace risim
