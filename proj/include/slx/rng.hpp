#pragma once

#include <cmath>
#include <cstdint>

namespace slx {

// splitmix64 step (Steele, Lea, Vigna). Bit-stable everywhere; good enough
// mixing to key independent streams off (seed, counter, label) tuples.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// One independent random stream addressed by (seed, stream, substream).
// Extraction keys these by (rng_seed, sample index, design hash), so results
// are reproducible bit-for-bit no matter how samples are partitioned across
// threads or how matrix rows are ordered.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
        std::uint64_t s = seed;
        state_ = splitmix64(s);
        s = state_ ^ (stream + 0x9e3779b97f4a7c15ull);
        state_ = splitmix64(s);
        s = state_ ^ (substream + 0xd1b54a32d192ed03ull);
        state_ = splitmix64(s);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on (0, 1]: never returns 0, so it is safe under log().
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. One deviate per pair of uniforms; the
    // unused sine branch is discarded to keep the stream layout trivial.
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

private:
    std::uint64_t state_ = 0;
};

}  // namespace slx
