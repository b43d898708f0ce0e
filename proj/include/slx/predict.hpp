#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "slx/core.hpp"
#include "slx/sle.hpp"

namespace slx {

// Forward prediction of one design's Q_TLS across the Monte-Carlo tangent
// samples. std_q_tls is the raw across-sample standard deviation; the
// conventional 2x factor for horizontal error bars is applied by the plot
// layer, never stored.
struct PredictedQ {
    DesignId design;
    double mean_q_tls = 0.0;
    double std_q_tls = 0.0;
};

// Measured-vs-predicted loss decomposition for one design. total loss uses
// the measured ensemble mean; the components are the predicted per-region
// decomposition and sum to predicted_total_loss, which in general differs
// from the measured total.
struct LossBudget {
    DesignId design;
    double measured_total_loss = 0.0;
    double predicted_total_loss = 0.0;
    RegionArray per_region_loss{};
};

// 1/Q_TLS = sum_r p_r * tan(delta_r). Pure dot product in canonical region
// order; zero means lossless (reported as infinite Q by consumers).
double forward_loss(const RegionArray& participation, const RegionArray& tangents);

// Per-design mean and standard deviation of 1/loss across the retained
// Monte-Carlo samples. Falls back to a first-order propagation from the
// estimate moments (independent-region approximation) when the sample array
// was not retained. A design whose predicted loss vanishes in every sample
// gets the infinite-Q sentinel (mean = +inf, std = 0).
std::vector<PredictedQ> predict_q(const ParticipationMatrix& matrix,
                                  const ExtractionResult& result);

// Juxtaposes measured total loss (1/mean_q_tls) with the predicted
// per-region decomposition (p_r * mean tangent_r) for every design.
// Throws DomainError when a matrix design has no matching stats.
std::vector<LossBudget> loss_budget(const ParticipationMatrix& matrix,
                                    const ExtractionResult& result,
                                    std::span<const EnsembleStats> measured);

// Report files. Non-finite quality factors serialize as JSON null.
void write_predict_report(const std::filesystem::path& path,
                          std::span<const PredictedQ> predicted,
                          std::span<const EnsembleStats> measured);
void write_budget_report(const std::filesystem::path& path,
                         std::span<const LossBudget> budgets);

}  // namespace slx
