#include "slx/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "slx/errors.hpp"
#include "slx/predict.hpp"
#include "slx/rng.hpp"

namespace slx {

void SynthSpec::validate() const {
    if (const auto violations = validate_matrix(matrix); !violations.empty())
        throw ValidationError("invalid participation matrix: " + violations.front().message());
    if (n_per_design == 0) throw ValidationError("n_per_design must be >= 1");
    if (!(relative_noise >= 0.0) || relative_noise >= 1.0)
        throw ValidationError("relative_noise must lie in [0, 1)");
    if (q_hp && !(*q_hp > 0.0))
        throw ValidationError("fixed q_hp must be positive");
    for (double t : true_tangents)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw ValidationError("true tangents must be finite and >= 0");
}

std::vector<ResonatorMeasurement> generate(const SynthSpec& spec) {
    spec.validate();

    const double rel = spec.relative_noise;
    const double sigma_ln = rel > 0.0 ? std::sqrt(std::log1p(rel * rel)) : 0.0;
    const double mean_correction = rel > 0.0 ? std::sqrt(1.0 + rel * rel) : 1.0;

    std::vector<ResonatorMeasurement> out;
    out.reserve(spec.matrix.row_count() * spec.n_per_design);

    for (std::size_t row = 0; row < spec.matrix.row_count(); ++row) {
        const DesignId& id = spec.matrix.designs[row];
        const double loss = forward_loss(spec.matrix.row(row), spec.true_tangents);
        if (!(loss > 0.0))
            throw DomainError("zero forward loss for " + to_string(id) +
                              ": synthetic Q_TLS is unbounded");
        const double q_true = 1.0 / loss;
        const std::uint64_t hash = design_hash(id);

        for (std::size_t k = 0; k < spec.n_per_design; ++k) {
            double q = q_true;
            if (rel > 0.0) {
                StreamRng rng(spec.rng_seed, k, hash);
                q = q_true * std::exp(sigma_ln * rng.next_normal()) / mean_correction;
            }
            double q_lp;
            double q_hp;
            if (spec.q_hp) {
                q_hp = *spec.q_hp;
                q_lp = q * q_hp / (q + q_hp);
            } else {
                q_hp = std::numeric_limits<double>::infinity();
                q_lp = q;
            }
            char rid[16];
            std::snprintf(rid, sizeof(rid), "r%03zu", k);
            out.push_back(ResonatorMeasurement{id, rid, q_lp, q_hp});
        }
    }
    return out;
}

}  // namespace slx
