#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slx/core.hpp"

namespace slx {

// Recipe for a synthetic measurement set with known ground truth. The
// round-trip generate -> ensemble stats -> extract is the library's
// independent end-to-end oracle.
struct SynthSpec {
    ParticipationMatrix matrix;
    RegionArray true_tangents{};
    std::size_t n_per_design = 30;
    double relative_noise = 0.0;       // multiplicative dispersion of Q_TLS, in [0, 1)
    std::optional<double> q_hp;        // nullopt = infinite (no power dependence)
    std::uint64_t rng_seed = 0;

    // Throws ValidationError on out-of-range fields or an invalid matrix.
    void validate() const;
};

// For every design row and resonator index: true Q_TLS from the forward
// model, mean-preserving lognormal noise with the requested relative
// dispersion, then Q_LP reconstructed against the Q_HP model:
//   1/Q_LP = 1/Q_TLS + 1/Q_HP.
// Noise-free generation reproduces the true Q_TLS bit-exactly. Streams are
// keyed by (seed, resonator index, design hash): deterministic per seed and
// independent of row order.
//
// Throws DomainError when a design's forward loss is zero (its Q_TLS is
// unbounded and Q_LP cannot be formed).
std::vector<ResonatorMeasurement> generate(const SynthSpec& spec);

}  // namespace slx
