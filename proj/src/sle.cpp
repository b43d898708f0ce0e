#include "slx/sle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "slx/errors.hpp"
#include "slx/rng.hpp"
#include "slx/running_stats.hpp"

namespace slx {

namespace {

// Draws exceeding this many positivity redraws reject the whole sample.
constexpr int kMaxRedraws = 100;

std::string format_condition(double c) {
    std::ostringstream os;
    os.precision(3);
    os << c;
    return os.str();
}

}  // namespace

NnlsSolution nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (m <= 0 || n <= 0) throw DomainError("nnls: empty system");
    if (b.size() != m) throw DomainError("nnls: dimension mismatch between matrix and rhs");

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    std::vector<bool> blocked(static_cast<std::size_t>(n), false);

    const double grad_scale = std::max((a.transpose() * b).cwiseAbs().maxCoeff(),
                                       std::numeric_limits<double>::min());
    const double tol = kNnlsStationarityTol * grad_scale;

    // Least-squares solve restricted to the passive columns; zeros elsewhere.
    auto solve_passive = [&](const std::vector<bool>& set) -> Eigen::VectorXd {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < n; ++j)
            if (set[static_cast<std::size_t>(j)]) cols.push_back(j);
        Eigen::MatrixXd sub(m, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
        const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = z[static_cast<Eigen::Index>(k)];
        return full;
    };

    int iterations = 0;
    const int max_iterations = 10 * static_cast<int>(n) + 10;

    while (iterations < max_iterations) {
        const Eigen::VectorXd w = a.transpose() * (b - a * x);

        // Pick the most promising zero-set column.
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (passive[ju] || blocked[ju]) continue;
            if (w[j] > wmax) {
                wmax = w[j];
                best = j;
            }
        }
        if (best < 0) break;  // KKT satisfied on the zero set

        passive[static_cast<std::size_t>(best)] = true;
        ++iterations;

        Eigen::VectorXd z = solve_passive(passive);
        if (z[best] <= 0.0) {
            // Candidate is numerically dependent on the current passive set;
            // block it until the set changes again.
            passive[static_cast<std::size_t>(best)] = false;
            blocked[static_cast<std::size_t>(best)] = true;
            continue;
        }

        // Inner loop: walk toward z, dropping variables that hit zero.
        while (true) {
            bool feasible = true;
            double alpha = 1.0;
            Eigen::Index drop = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!passive[static_cast<std::size_t>(j)] || z[j] > 0.0) continue;
                feasible = false;
                const double t = x[j] / (x[j] - z[j]);
                if (t < alpha) {
                    alpha = t;
                    drop = j;
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)]) x[j] += alpha * (z[j] - x[j]);
            if (drop >= 0) x[drop] = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (passive[ju] && x[j] <= 0.0) {
                    x[j] = 0.0;
                    passive[ju] = false;
                }
            }
            ++iterations;
            if (iterations >= max_iterations) break;
            z = solve_passive(passive);
        }
        std::fill(blocked.begin(), blocked.end(), false);
    }

    NnlsSolution out;
    out.x = std::move(x);
    out.residual_norm = (a * out.x - b).norm();
    out.iterations = iterations;
    return out;
}

double condition_number(const ParticipationMatrix& matrix) {
    const auto m = static_cast<Eigen::Index>(matrix.row_count());
    Eigen::MatrixXd a(m, static_cast<Eigen::Index>(kRegionCount));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Region r : kRegions)
            a(i, static_cast<Eigen::Index>(region_index(r))) =
                matrix.at(static_cast<std::size_t>(i), r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv[0] / smin;
}

namespace {

// Matrix rows in canonical DesignId order, so draws, the linear system and
// every downstream reduction are independent of input row order.
std::vector<std::size_t> canonical_row_order(const ParticipationMatrix& matrix) {
    std::vector<std::size_t> order(matrix.row_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return matrix.designs[i] < matrix.designs[j];
    });
    return order;
}

Eigen::MatrixXd build_system(const ParticipationMatrix& matrix,
                             const std::vector<std::size_t>& order) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(order.size()),
                      static_cast<Eigen::Index>(kRegionCount));
    for (std::size_t i = 0; i < order.size(); ++i)
        for (Region r : kRegions)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(region_index(r))) =
                matrix.at(order[i], r);
    return a;
}

}  // namespace

RegionArray solve_nnls(const ParticipationMatrix& matrix,
                       const std::map<DesignId, double>& inverse_q) {
    if (matrix.row_count() == 0) throw DomainError("solve_nnls: empty participation matrix");
    if (inverse_q.size() != matrix.row_count())
        throw DomainError("solve_nnls: inverse_q size does not match matrix rows");

    const auto order = canonical_row_order(matrix);
    const Eigen::MatrixXd a = build_system(matrix, order);
    Eigen::VectorXd b(static_cast<Eigen::Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto it = inverse_q.find(matrix.designs[order[i]]);
        if (it == inverse_q.end())
            throw DomainError("solve_nnls: no inverse_q value for " +
                              to_string(matrix.designs[order[i]]));
        b[static_cast<Eigen::Index>(i)] = it->second;
    }

    const NnlsSolution sol = nnls(a, b);
    RegionArray out{};
    for (std::size_t r = 0; r < kRegionCount; ++r) out[r] = sol.x[static_cast<Eigen::Index>(r)];
    return out;
}

ExtractionResult extract(const ParticipationMatrix& matrix,
                         std::span<const EnsembleStats> stats, const ExtractionConfig& config,
                         const ExecutionOptions& options) {
    config.validate();
    if (const auto violations = validate_matrix(matrix); !violations.empty())
        throw ValidationError("invalid participation matrix: " + violations.front().message());

    const auto order = canonical_row_order(matrix);
    const std::size_t n_designs = order.size();

    // Align stats with the canonical row order.
    std::vector<double> means(n_designs), errs(n_designs);
    std::vector<std::uint64_t> hashes(n_designs);
    for (std::size_t i = 0; i < n_designs; ++i) {
        const DesignId& id = matrix.designs[order[i]];
        const auto it = std::find_if(stats.begin(), stats.end(),
                                     [&](const EnsembleStats& s) { return s.design == id; });
        if (it == stats.end())
            throw DomainError("missing ensemble stats for " + to_string(id));
        if (!std::isfinite(it->mean_q_tls) || !std::isfinite(it->std_err_q_tls) ||
            it->std_err_q_tls < 0.0)
            throw ValidationError("invalid ensemble stats for " + to_string(id));
        means[i] = it->mean_q_tls;
        errs[i] = it->std_err_q_tls;
        hashes[i] = design_hash(id);
    }

    const Eigen::MatrixXd a = build_system(matrix, order);
    const std::size_t n = config.n_samples;

    std::vector<RegionArray> samples(n);
    std::vector<std::uint8_t> kept(n, 0);
    std::vector<std::uint32_t> redraws(n, 0);

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        Eigen::VectorXd b(static_cast<Eigen::Index>(n_designs));
        for (std::size_t i = lo; i < hi; ++i) {
            bool ok = true;
            std::uint32_t local_redraws = 0;
            for (std::size_t d = 0; d < n_designs && ok; ++d) {
                StreamRng rng(config.rng_seed, i, hashes[d]);
                double q = means[d] + errs[d] * rng.next_normal();
                int tries = 0;
                while (!(q > 0.0)) {
                    if (++tries > kMaxRedraws) {
                        ok = false;
                        break;
                    }
                    ++local_redraws;
                    q = means[d] + errs[d] * rng.next_normal();
                }
                if (ok) b[static_cast<Eigen::Index>(d)] = 1.0 / q;
            }
            redraws[i] = local_redraws;
            if (!ok) continue;
            const NnlsSolution sol = nnls(a, b);
            for (std::size_t r = 0; r < kRegionCount; ++r)
                samples[i][r] = sol.x[static_cast<Eigen::Index>(r)] * config.region_scale[r];
            kept[i] = 1;
        }
    };

    unsigned threads = options.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t lo = static_cast<std::size_t>(t) * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Fixed-order reduction keeps the result independent of thread count.
    std::array<RunningStats, kRegionCount> acc;
    std::size_t n_kept = 0;
    std::size_t total_redraws = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total_redraws += redraws[i];
        if (!kept[i]) continue;
        ++n_kept;
        for (std::size_t r = 0; r < kRegionCount; ++r) acc[r].add(samples[i][r]);
    }
    if (n_kept == 0)
        throw DomainError("all Monte-Carlo samples rejected: ensemble stats do not admit "
                          "positive Q_TLS draws");

    ExtractionResult result;
    result.config = config;
    result.samples_kept = n_kept;
    result.samples_rejected = n - n_kept;
    result.resample_count = total_redraws;
    result.condition_diagnostic = condition_number(matrix);
    for (Region r : kRegions) {
        const auto idx = region_index(r);
        result.estimates[idx] =
            LossTangentEstimate{r, acc[idx].mean(), acc[idx].sample_std(), true, std::nullopt};
    }
    if (options.keep_samples) {
        std::vector<RegionArray> retained;
        retained.reserve(n_kept);
        for (std::size_t i = 0; i < n; ++i)
            if (kept[i]) retained.push_back(samples[i]);
        result.per_sample_tangents = std::move(retained);
    }
    if (result.condition_diagnostic > kConditionWarningThreshold)
        result.warnings.push_back("participation matrix condition number " +
                                  format_condition(result.condition_diagnostic) +
                                  " exceeds 1e6; regions may not deconvolve");
    if (result.samples_rejected > 0)
        result.warnings.push_back(std::to_string(result.samples_rejected) +
                                  " of " + std::to_string(n) + " samples rejected after " +
                                  std::to_string(kMaxRedraws) + " positivity redraws");
    return result;
}

}  // namespace slx
