#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace risim {

// Purpose tags for derived random streams. Every stochastic quantity in the
// simulator draws from a stream derived from (master seed, purpose, indices),
// so results never depend on evaluation order or thread count.
enum class StreamTag : std::uint64_t {
    geometry = 1,
    los_flags = 2,
    phase_init = 3,
    small_scale = 4,
    pilot_noise = 5,
    dl_symbols = 6,
    dl_noise = 7,
    genie = 8,
    weight_init = 9,
    shuffle = 10,
    split = 11,
    bootstrap = 12,
    misc = 13,
};

/// Independently seedable random stream with the draw primitives the
/// simulator needs. Deterministic for a fixed (seed, tag, indices) tuple.
class RngStream {
  public:
    RngStream() : engine_(0x9e3779b97f4a7c15ULL) {}
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Derive a stream from a master seed, a purpose tag and up to three
    /// indices (e.g. large-scale index, small-scale index, link index).
    static RngStream derive(std::uint64_t master_seed, StreamTag tag,
                            std::uint64_t a = 0, std::uint64_t b = 0,
                            std::uint64_t c = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard real Gaussian N(0, 1).
    double gaussian();
    /// Circularly symmetric complex Gaussian CN(0, 1).
    std::complex<double> cgaussian();
    /// Unit-power QPSK symbol, one of {+-1 +- j}/sqrt(2).
    std::complex<double> qpsk();
    /// Bernoulli draw with success probability p.
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used for seed derivation and config hashing.
std::uint64_t mix_u64(std::uint64_t x);

}  // namespace risim
