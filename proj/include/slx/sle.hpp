#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slx/core.hpp"

namespace slx {

// Stationarity tolerance of the active-set solver, relative to the largest
// gradient component of the problem.
inline constexpr double kNnlsStationarityTol = 1e-12;

// Condition numbers above this flag a design set with limited ability to
// deconvolve regions.
inline constexpr double kConditionWarningThreshold = 1e6;

struct NnlsSolution {
    Eigen::VectorXd x;            // minimizer of ||A x - b||_2 subject to x >= 0
    double residual_norm = 0.0;   // ||A x - b||_2 at the solution
    int iterations = 0;
};

// Lawson-Hanson active-set non-negative least squares. Exact KKT
// certificates on the small systems this library solves: at the returned x,
// gradient components vanish (to tolerance) on the positive set and are
// non-negative on the zero set.
NnlsSolution nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

// Ratio of largest to smallest singular value of the participation matrix
// (+infinity when rank deficient).
double condition_number(const ParticipationMatrix& matrix);

// Solves 1/Q_TLS = sum_r p_r tan(delta_r) for tan(delta) >= 0 against the
// given per-design inverse quality factors. inverse_q must provide exactly
// one value per matrix row (DomainError otherwise). Rows are processed in
// canonical DesignId order, so the result does not depend on row order.
RegionArray solve_nnls(const ParticipationMatrix& matrix,
                       const std::map<DesignId, double>& inverse_q);

struct ExecutionOptions {
    unsigned threads = 1;      // 0 = hardware concurrency
    bool keep_samples = true;  // retain the per-sample tangent array
};

struct ExtractionResult {
    std::array<LossTangentEstimate, kRegionCount> estimates;
    std::size_t samples_kept = 0;
    double condition_diagnostic = 0.0;
    std::size_t resample_count = 0;    // positivity redraws across all samples
    std::size_t samples_rejected = 0;  // samples dropped after the redraw cap
    // Kept samples' tangents (region_scale applied), in sample-index order.
    std::optional<std::vector<RegionArray>> per_sample_tangents;
    ExtractionConfig config;
    std::vector<std::string> warnings;

    const LossTangentEstimate& estimate(Region r) const { return estimates[region_index(r)]; }
};

// Monte-Carlo surface-loss extraction: for each of config.n_samples
// iterations, draw one Q_TLS per design from N(mean, std_err) (redrawing
// non-positive values), invert, solve the non-negative system, and scale by
// config.region_scale. Estimates carry the across-sample mean and sample
// standard deviation per region; resolvability annotation is a separate step
// (see bounds.hpp).
//
// Deterministic: streams are keyed by (seed, sample index, design hash), and
// reduction order is fixed, so the result is bit-identical for any thread
// count and any row order of `matrix`.
ExtractionResult extract(const ParticipationMatrix& matrix,
                         std::span<const EnsembleStats> stats, const ExtractionConfig& config,
                         const ExecutionOptions& options = {});

}  // namespace slx
