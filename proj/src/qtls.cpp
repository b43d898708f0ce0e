#include "slx/qtls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slx/errors.hpp"
#include "slx/running_stats.hpp"

namespace slx {

double q_tls(double q_lp, double q_hp) {
    if (!(q_lp > 0.0) || std::isnan(q_hp) || !(q_hp > 0.0))
        throw DomainError("non-positive Q");
    if (std::isinf(q_lp)) throw DomainError("non-finite Q_LP");
    if (std::isinf(q_hp)) return q_lp;
    if (q_hp <= q_lp)
        throw DomainError("non-TLS-limited: Q_HP <= Q_LP leaves no positive loss difference");
    return q_lp * q_hp / (q_hp - q_lp);
}

EnsembleStats ensemble_stats(std::span<const ResonatorMeasurement> measurements,
                             const DesignId& design) {
    RunningStats acc;
    for (const auto& m : measurements) {
        if (m.design != design) continue;
        acc.add(q_tls(m.q_lp, m.q_hp));
    }
    if (acc.count() == 0)
        throw DomainError("empty ensemble: no valid measurements for " + to_string(design));
    return EnsembleStats{design, acc.mean(), acc.std_err(), acc.count()};
}

std::vector<EnsembleStats> ensemble_stats_all(
    std::span<const ResonatorMeasurement> measurements) {
    std::vector<DesignId> seen;
    for (const auto& m : measurements)
        if (std::find(seen.begin(), seen.end(), m.design) == seen.end())
            seen.push_back(m.design);
    std::vector<EnsembleStats> out;
    out.reserve(seen.size());
    for (const auto& d : seen) out.push_back(ensemble_stats(measurements, d));
    return out;
}

}  // namespace slx
