#pragma once

#include <span>

#include "slx/core.hpp"
#include "slx/sle.hpp"

namespace slx {

// True when the estimate is statistically distinguishable from zero under
// `rule`: zero must lie outside the sigma_multiplier interval and
// (optionally) std must not exceed the mean. Never throws.
bool is_resolvable(double mean, double std, const ResolvabilityRule& rule = {});

// Highest loss tangent for `target` consistent with the measured loss of its
// accentuating design: the region soaks up whatever loss remains after the
// other regions contribute their two-sigma minima,
//
//   p_t^-1 [ (mu_Q - se_Q)^-1 - sum_{r != t} p_r max(0, mean_r - 2 std_r) ]
//
// with participations taken from the accentuating design's row. The max(0,.)
// clamp keeps a negative "minimum" from inflating the bound. region_scale
// converts between solved tangents and loss units; identity by default.
//
// Throws DomainError when the accentuating row is missing, p_t <= 0,
// mu_Q <= se_Q, or the bracketed loss is <= 0 (bound not meaningful: the
// other regions' minima already explain the measured loss).
double upper_bound(const ParticipationMatrix& matrix, const EnsembleStats& accent_stats,
                   const std::array<LossTangentEstimate, kRegionCount>& estimates,
                   Region target, const RegionArray& region_scale = {1.0, 1.0, 1.0, 1.0});

// Applies the configured resolvability rule to every estimate and attaches
// upper bounds to the regions it flags. When a flagged region's bound is not
// computable (missing accentuating design, bracket <= 0), the estimate stays
// resolvable and a warning is appended instead, so the estimate invariant
// (bound present iff unresolvable) always holds.
ExtractionResult annotate_resolvability(ExtractionResult result,
                                        const ParticipationMatrix& matrix,
                                        std::span<const EnsembleStats> stats);

}  // namespace slx
