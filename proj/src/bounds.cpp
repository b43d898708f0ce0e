#include "slx/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "slx/errors.hpp"

namespace slx {

bool is_resolvable(double mean, double std, const ResolvabilityRule& rule) {
    if (mean - rule.sigma_multiplier * std < 0.0) return false;
    if (rule.unresolvable_if_std_exceeds_mean && std > mean) return false;
    return true;
}

double upper_bound(const ParticipationMatrix& matrix, const EnsembleStats& accent_stats,
                   const std::array<LossTangentEstimate, kRegionCount>& estimates,
                   Region target, const RegionArray& region_scale) {
    const DesignKind kind = accentuating_design(target);
    const auto row = matrix.find_row(kind);
    if (!row)
        throw DomainError("upper_bound: matrix has no " + std::string(to_string(kind)) +
                          " row for target region " + std::string(to_string(target)));
    if (accent_stats.design.design != kind)
        throw DomainError("upper_bound: stats are for " + to_string(accent_stats.design) +
                          ", not the accentuating " + std::string(to_string(kind)));

    const double p_target = matrix.at(*row, target);
    if (!(p_target > 0.0))
        throw DomainError("upper_bound: accentuating design has zero participation in " +
                          std::string(to_string(target)));

    const double mu = accent_stats.mean_q_tls;
    const double se = accent_stats.std_err_q_tls;
    if (!(mu > se))
        throw DomainError("upper_bound: mean Q_TLS does not exceed its standard error");

    // Highest measured loss consistent with the ensemble.
    const double measured_loss = 1.0 / (mu - se);

    double other_loss = 0.0;
    for (Region r : kRegions) {
        if (r == target) continue;
        const auto idx = region_index(r);
        const LossTangentEstimate& est = estimates[idx];
        const double minimum = std::max(0.0, est.mean - 2.0 * est.std) / region_scale[idx];
        other_loss += matrix.at(*row, r) * minimum;
    }

    const double bracket = measured_loss - other_loss;
    if (!(bracket > 0.0))
        throw DomainError("upper_bound: bound not meaningful; other regions' minimum loss "
                          "already explains the measured loss");

    return region_scale[region_index(target)] * bracket / p_target;
}

ExtractionResult annotate_resolvability(ExtractionResult result,
                                        const ParticipationMatrix& matrix,
                                        std::span<const EnsembleStats> stats) {
    const ResolvabilityRule& rule = result.config.resolvability_rule;
    for (Region r : kRegions) {
        LossTangentEstimate& est = result.estimates[region_index(r)];
        est.resolvable = true;
        est.upper_bound.reset();
        if (is_resolvable(est.mean, est.std, rule)) continue;

        const DesignKind kind = accentuating_design(r);
        const auto it = std::find_if(stats.begin(), stats.end(), [&](const EnsembleStats& s) {
            return s.design.design == kind;
        });
        if (it == stats.end()) {
            result.warnings.push_back("region " + std::string(to_string(r)) +
                                      " is unresolvable but no " + std::string(to_string(kind)) +
                                      " stats are available for a bound");
            continue;
        }
        try {
            const double bound =
                upper_bound(matrix, *it, result.estimates, r, result.config.region_scale);
            est.resolvable = false;
            est.upper_bound = bound;
        } catch (const DomainError& e) {
            result.warnings.push_back("region " + std::string(to_string(r)) +
                                      " is unresolvable but has no usable bound: " + e.what());
        }
    }
    return result;
}

}  // namespace slx
