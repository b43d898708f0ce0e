#pragma once

#include <span>
#include <vector>

#include "slx/core.hpp"

namespace slx {

// TLS-limited quality factor from the low/high-power pair:
//   1/Q_TLS = 1/Q_LP - 1/Q_HP
// computed as q_lp*q_hp/(q_hp - q_lp) to avoid the double reciprocal
// round-trip. q_hp = +infinity is the "no power dependence" sentinel and
// returns q_lp exactly.
//
// Throws DomainError for non-positive inputs and for q_hp <= q_lp (the loss
// difference is zero or negative, i.e. not TLS-limited).
double q_tls(double q_lp, double q_hp);

// Mean, standard error (sample std / sqrt(n), n-1 denominator) and count of
// per-resonator Q_TLS over all measurements of `design`. Records for other
// designs are ignored. Throws DomainError when no measurement matches or
// when a matching record is invalid for q_tls.
EnsembleStats ensemble_stats(std::span<const ResonatorMeasurement> measurements,
                             const DesignId& design);

// ensemble_stats for every distinct design present, in order of first
// appearance.
std::vector<EnsembleStats> ensemble_stats_all(
    std::span<const ResonatorMeasurement> measurements);

}  // namespace slx
