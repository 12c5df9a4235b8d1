#pragma once

#include "risim/bs_estimation.hpp"
#include "risim/channel_model.hpp"
#include "risim/downlink.hpp"
#include "risim/rng.hpp"

namespace risim {

/// Everything fixed over one large-scale realization: the drawn large-scale
/// state, pilot book, and the precomputed per-UE estimation filters.
struct LinkContext {
    Scenario sc;  // finalized copy
    arma::uword ls_index = 0;
    LargeScaleRealization ls;
    PilotBook pilots;
    BsSideStatistics bs;
};

/// Draws the large-scale state for realization ls_index of the scenario and
/// precomputes the BS-side statistics (stream: (seed, geometry, ls_index)).
LinkContext make_link_context(const Scenario& sc, arma::uword ls_index);

/// Product of one coherence interval: channels, estimates, precoders, gains.
struct CoherenceInterval {
    ChannelRealization ch;
    arma::cx_mat u_hat;  // M x K
    PrecoderSet precoders;
    EffectiveGains gains;
};

/// One full uplink-training + precoding pass: small-scale draw, pilot
/// reception, per-UE MMSE estimation, MR precoding, effective gains.
/// All randomness (fading, pilot noise) comes from rng in a fixed order.
CoherenceInterval run_coherence_interval(const LinkContext& ctx, RngStream& rng,
                                         bool pilot_noise = true);

}  // namespace risim
