#include "risim/link_simulation.hpp"

namespace risim {

LinkContext make_link_context(const Scenario& sc, arma::uword ls_index) {
    LinkContext ctx;
    ctx.sc = sc;
    ctx.sc.finalize();
    ctx.ls_index = ls_index;
    RngStream geo = RngStream::derive(ctx.sc.seed, StreamTag::geometry, ls_index);
    ctx.ls = sample_large_scale(ctx.sc, geo);
    ctx.pilots = PilotBook::identity(ctx.sc.effective_tau_p(), ctx.sc.K);
    ctx.bs = prepare_bs_side(ctx.ls, ctx.sc.rho_ul, ctx.sc.effective_tau_p());
    return ctx;
}

CoherenceInterval run_coherence_interval(const LinkContext& ctx, RngStream& rng,
                                         bool pilot_noise) {
    const arma::uword K = ctx.sc.K;
    const arma::uword tau_p = ctx.sc.effective_tau_p();

    CoherenceInterval out;
    out.ch = sample_small_scale(ctx.ls, rng);
    arma::cx_mat Yp = receive_uplink_pilots(out.ch, ctx.pilots, ctx.sc.rho_ul,
                                            tau_p, rng, pilot_noise);
    arma::cx_mat proj = Yp * ctx.pilots.phi;  // column k = Y_p phi_k
    out.u_hat.set_size(ctx.sc.M, K);
    for (arma::uword k = 0; k < K; ++k) {
        out.u_hat.col(k) = ctx.bs.filters[k].apply(proj.col(k));
    }
    out.precoders = mr_precoder_set(out.u_hat, ctx.bs.filters);
    out.gains = effective_gains(out.ch, out.precoders, ctx.sc.rho_d);
    return out;
}

}  // namespace risim
