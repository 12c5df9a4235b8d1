#include "risim/rng.hpp"

#include <cmath>

namespace risim {

std::uint64_t mix_u64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t master_seed, StreamTag tag,
                            std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = mix_u64(master_seed);
    s = mix_u64(s ^ static_cast<std::uint64_t>(tag));
    s = mix_u64(s ^ a);
    s = mix_u64(s ^ b);
    s = mix_u64(s ^ c);
    return RngStream(s);
}

double RngStream::uniform() {
    // 53-bit mantissa, uniform on [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    // rejection sampling, no modulo bias
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double RngStream::gaussian() {
    // Box-Muller, cosine branch only; keeps the stream position independent
    // of call history.
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::complex<double> RngStream::cgaussian() {
    // |z|^2 ~ Exp(1), phase uniform: exactly CN(0, 1) from two uniforms.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

std::complex<double> RngStream::qpsk() {
    static const double h = 1.0 / std::sqrt(2.0);
    const std::uint64_t bits = engine_() >> 62;
    return {(bits & 1) ? h : -h, (bits & 2) ? h : -h};
}

}  // namespace risim
