#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "risim/ue_estimation.hpp"

using namespace risim;

namespace {

Scenario small_cell(arma::uword M, arma::uword K,
                    LosRegime regime = LosRegime::probabilistic) {
    Scenario sc;
    sc.M = M;
    sc.N = 4;
    sc.L = 1;
    sc.K = K;
    sc.regime = regime;
    sc.seed = 57;
    sc.finalize();
    return sc;
}

}  // namespace

TEST_CASE("sample mean power") {
    const arma::cx_vec units{cx_double(1, 0), cx_double(0, 1), cx_double(-1, 0),
                             cx_double(0, -1)};
    CHECK(sample_mean_power(units) == doctest::Approx(1.0).epsilon(1e-15));

    const arma::cx_vec zeros(8, arma::fill::zeros);
    CHECK(sample_mean_power(zeros) == 0.0);

    CHECK_THROWS_AS(sample_mean_power(arma::cx_vec{}), std::invalid_argument);

    // single stream with gain 3, no noise: every sample has power 9
    EffectiveGains gains;
    gains.alpha.set_size(1, 1);
    gains.alpha(0, 0) = cx_double(3.0, 0.0);
    RngStream rng(2);
    const arma::cx_vec y = downlink_receive(gains, 0, 16, rng, false);
    CHECK(sample_mean_power(y) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("interference plus noise power: degenerate cases") {
    // single user: the interference sum is empty
    const Scenario sc = small_cell(4, 1);
    const LinkContext ctx = make_link_context(sc, 0);
    CHECK(interference_noise_power(ctx, 0, 50) == 1.0);

    // no downlink power: every gain is zero
    LinkContext dark = make_link_context(small_cell(4, 3), 0);
    dark.sc.rho_d = 0.0;
    CHECK(interference_noise_power(dark, 1, 50) == 1.0);

    CHECK_THROWS_AS(compute_ue_statistics(ctx, 0), std::invalid_argument);
}

TEST_CASE("interference power matches a brute-force average") {
    const Scenario sc = small_cell(8, 10);
    const LinkContext ctx = make_link_context(sc, 0);
    const arma::uword k = 3;

    const int n_genie = 10000;
    const double genie = interference_noise_power(ctx, k, n_genie);

    // independent second estimate from a different stream family
    const int n_brute = 10000;
    double acc = 0.0, acc2 = 0.0;
    for (int d = 0; d < n_brute; ++d) {
        RngStream rng = RngStream::derive(sc.seed, StreamTag::misc, 7, d);
        const CoherenceInterval ci = run_coherence_interval(ctx, rng);
        double s = 0.0;
        for (arma::uword kp = 0; kp < sc.K; ++kp)
            if (kp != k)
                s += std::norm(ci.gains.alpha(k, kp));
        acc += s;
        acc2 += s * s;
    }
    const double mean = acc / n_brute;
    const double var = acc2 / n_brute - mean * mean;
    const double se = std::sqrt(var / n_brute);
    // both sides are Monte-Carlo estimates of the same expectation
    CHECK(std::abs(genie - (mean + 1.0)) < 3.0 * se * std::sqrt(2.0));
}

TEST_CASE("statistics bundle is deterministic and self-consistent") {
    const Scenario sc = small_cell(6, 4);
    const LinkContext ctx = make_link_context(sc, 2);
    const auto s1 = compute_ue_statistics(ctx, 200);
    const auto s2 = compute_ue_statistics(ctx, 200);
    REQUIRE(s1.size() == sc.K);
    for (arma::uword k = 0; k < sc.K; ++k) {
        CHECK(s1[k].mean_alpha_kk == s2[k].mean_alpha_kk);
        CHECK(s1[k].delta_k == s2[k].delta_k);
        CHECK(s1[k].delta_k >= 1.0);
        CHECK(s1[k].power_feature ==
              doctest::Approx(sc.rho_d / sc.K * ctx.bs.stats[k].E_norm2_u));
        CHECK(s1[k].mc_samples == 200);
    }
}

TEST_CASE("hardening bound is the stored mean and is exact without fading") {
    UeStatistics stats;
    stats.mean_alpha_kk = cx_double(1.2, -0.3);
    CHECK(hardening_bound_estimate(stats) == stats.mean_alpha_kk);

    // deterministic channel: the mean equals every realization
    Scenario sc = small_cell(4, 2, LosRegime::los_dominated);
    sc.pathloss.k_intercept_db = std::numeric_limits<double>::infinity();
    const LinkContext ctx = make_link_context(sc, 0);
    const auto stats_v = compute_ue_statistics(ctx, 25);
    RngStream rng = RngStream::derive(sc.seed, StreamTag::small_scale, 0);
    const CoherenceInterval ci = run_coherence_interval(ctx, rng);
    const cx_double est = hardening_bound_estimate(stats_v[0]);
    const cx_double truth = ci.gains.alpha(0, 0);
    CHECK(std::abs(est - truth) < 1e-10 * std::abs(truth));
    CHECK(nmse_db({est}, {truth}) <= -200.0);
}

TEST_CASE("hardening bound improves with more antennas") {
    const int n_ls = 30, n_genie = 300, n_eval = 40;
    double nmse[2];
    const arma::uword sizes[2] = {20, 100};
    for (int i = 0; i < 2; ++i) {
        const Scenario sc = small_cell(sizes[i], 1, LosRegime::nlos_dominated);
        std::vector<cx_double> est, truth;
        for (int ls = 0; ls < n_ls; ++ls) {
            const LinkContext ctx = make_link_context(sc, ls);
            const auto stats = compute_ue_statistics(ctx, n_genie);
            RngStream rng = RngStream::derive(sc.seed, StreamTag::small_scale, ls);
            for (int d = 0; d < n_eval; ++d) {
                const CoherenceInterval ci = run_coherence_interval(ctx, rng);
                est.push_back(hardening_bound_estimate(stats[0]));
                truth.push_back(ci.gains.alpha(0, 0));
            }
        }
        nmse[i] = nmse_db(est, truth);
    }
    CHECK(nmse[1] < nmse[0]);
}

TEST_CASE("blind estimate arithmetic and fallback") {
    UeStatistics stats;
    stats.delta_k = 1.5;
    stats.mean_alpha_kk = cx_double(0.4, 0.1);

    CHECK(model_based_estimate(5.5, stats) == cx_double(2.0, 0.0));
    CHECK(model_based_estimate(1.5, stats) == stats.mean_alpha_kk);
    CHECK(model_based_estimate(0.0, stats) == stats.mean_alpha_kk);

    // total on extreme inputs
    stats.delta_k = 1e12;
    CHECK(model_based_estimate(1e300, stats).real() > 0.0);
    CHECK(model_based_estimate(1e-300, stats) == stats.mean_alpha_kk);
}

TEST_CASE("blind estimate concentrates around the true gain") {
    EffectiveGains gains;
    gains.alpha.set_size(1, 1);
    gains.alpha(0, 0) = cx_double(2.0, 0.0);
    UeStatistics stats;
    stats.delta_k = 1.0;  // single user: noise only
    stats.mean_alpha_kk = cx_double(0.0, 0.0);

    const int n_trials = 1000, n_symbols = 490;
    int hits = 0;
    RngStream rng(71);
    for (int t = 0; t < n_trials; ++t) {
        const arma::cx_vec y = downlink_receive(gains, 0, n_symbols, rng);
        const cx_double est = model_based_estimate(sample_mean_power(y), stats);
        if (std::abs(est - gains.alpha(0, 0)) <= 0.2)
            ++hits;
    }
    CHECK(hits >= 950);
}

TEST_CASE("feature records keep the fixed ordering") {
    UeStatistics stats;
    stats.delta_k = 2.0;
    stats.power_feature = 3.0;
    stats.mean_alpha_kk = cx_double(0.6, 0.8);
    const FeatureRecord rec = build_feature_record(1.0, stats, cx_double(5, 1));

    const arma::vec full = feature_vector(rec, FeatureSet::all4);
    REQUIRE(full.n_elem == 4);
    CHECK(full(0) == 1.0);
    CHECK(full(1) == 2.0);
    CHECK(full(2) == 3.0);
    CHECK(full(3) == doctest::Approx(1.0));  // |0.6 + 0.8j|

    const arma::vec a = feature_vector(rec, FeatureSet::baseline_a);
    REQUIRE(a.n_elem == 3);
    CHECK(a(0) == 1.0);
    CHECK(a(1) == 2.0);
    CHECK(a(2) == 3.0);

    const arma::vec b = feature_vector(rec, FeatureSet::baseline_b);
    REQUIRE(b.n_elem == 3);
    CHECK(b(0) == 1.0);
    CHECK(b(1) == 2.0);
    CHECK(b(2) == doctest::Approx(1.0));

    CHECK(feature_count(FeatureSet::all4) == 4);
    CHECK(feature_count(FeatureSet::baseline_a) == 3);
    CHECK(feature_count(FeatureSet::baseline_b) == 3);
    for (FeatureSet s : {FeatureSet::all4, FeatureSet::baseline_a,
                         FeatureSet::baseline_b})
        CHECK(feature_set_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(feature_set_from_string("all5"), std::invalid_argument);

    CHECK_THROWS_AS(build_feature_record(
                        std::numeric_limits<double>::quiet_NaN(), stats,
                        cx_double(0, 0)),
                    std::invalid_argument);
    CHECK(rec.label_alpha == cx_double(5, 1));
}

TEST_CASE("error metric") {
    const std::vector<cx_double> truth{cx_double(1, 1), cx_double(-2, 0.5)};

    CHECK(nmse_db(truth, truth) == -300.0);
    CHECK(nmse_db(truth, truth, -120.0) == -120.0);

    const std::vector<cx_double> zeros(2, cx_double(0, 0));
    CHECK(nmse_db(zeros, truth) == doctest::Approx(0.0).epsilon(1e-12));

    // halving every estimate: ratio 1/4, i.e. about -6.02 dB
    std::vector<cx_double> half;
    for (auto& v : truth)
        half.push_back(0.5 * v);
    CHECK(nmse_db(half, truth) ==
          doctest::Approx(10.0 * std::log10(0.25)).epsilon(1e-12));

    // invariant under a common phase rotation
    std::vector<cx_double> est{cx_double(0.9, 1.2), cx_double(-1.7, 0.4)};
    const cx_double rot = std::polar(1.0, 1.234);
    std::vector<cx_double> est_r, truth_r;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        est_r.push_back(rot * est[i]);
        truth_r.push_back(rot * truth[i]);
    }
    CHECK(nmse_db(est, truth) ==
          doctest::Approx(nmse_db(est_r, truth_r)).epsilon(1e-12));

    CHECK_THROWS_AS(nmse_db(zeros, zeros), std::invalid_argument);
    CHECK_THROWS_AS(nmse_db({cx_double(1, 0)}, truth), std::invalid_argument);
}

TEST_CASE("longer observation windows do not hurt the blind estimator") {
    const Scenario sc = small_cell(8, 10);
    const LinkContext ctx = make_link_context(sc, 1);
    const auto stats = compute_ue_statistics(ctx, 1000);
    const arma::uword k = 0;

    const int n_trials = 120;
    const arma::uword windows[3] = {500, 5000, 50000};
    double err[3] = {0.0, 0.0, 0.0};

    RngStream rng = RngStream::derive(sc.seed, StreamTag::misc, 99);
    for (int t = 0; t < n_trials; ++t) {
        const CoherenceInterval ci = run_coherence_interval(ctx, rng);
        // one long waveform; the shorter windows are its prefixes, so the
        // comparison is paired and the sampling error shrinks within-trial
        const arma::cx_vec y =
            downlink_receive(ci.gains, k, windows[2] - sc.tau_p, rng);
        const double truth = std::abs(ci.gains.alpha(k, k));
        for (int w = 0; w < 3; ++w) {
            const arma::cx_vec head = y.head(windows[w] - sc.tau_p);
            const cx_double est =
                model_based_estimate(sample_mean_power(head), stats[k]);
            err[w] += std::abs(std::abs(est) - truth);
        }
    }
    CHECK(err[1] <= err[0] * 1.01);
    CHECK(err[2] <= err[1] * 1.01);
}
