#include "slx/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "slx/errors.hpp"
#include "slx/running_stats.hpp"
#include "slx/version.hpp"

namespace slx {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tangents divided by region_scale, i.e. back in the loss units the linear
// model is written in. Identity scales leave values bit-identical.
RegionArray loss_units(const RegionArray& tangents, const RegionArray& scale) {
    RegionArray out{};
    for (std::size_t r = 0; r < kRegionCount; ++r) out[r] = tangents[r] / scale[r];
    return out;
}

json design_fields(const DesignId& id) {
    return json{{"design", std::string(to_string(id.design))},
                {"material", id.material},
                {"process", id.process}};
}

void dump_to(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << "\n";
    if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

double forward_loss(const RegionArray& participation, const RegionArray& tangents) {
    double loss = 0.0;
    for (std::size_t r = 0; r < kRegionCount; ++r) loss += participation[r] * tangents[r];
    return loss;
}

std::vector<PredictedQ> predict_q(const ParticipationMatrix& matrix,
                                  const ExtractionResult& result) {
    const RegionArray& scale = result.config.region_scale;
    std::vector<PredictedQ> out;
    out.reserve(matrix.row_count());

    for (std::size_t i = 0; i < matrix.row_count(); ++i) {
        const RegionArray& row = matrix.row(i);
        PredictedQ p{matrix.designs[i], 0.0, 0.0};
        if (result.per_sample_tangents) {
            RunningStats acc;
            for (const RegionArray& sample : *result.per_sample_tangents) {
                const double loss = forward_loss(row, loss_units(sample, scale));
                if (loss > 0.0) acc.add(1.0 / loss);
            }
            if (acc.count() == 0) {
                p.mean_q_tls = kInf;
            } else {
                p.mean_q_tls = acc.mean();
                p.std_q_tls = acc.sample_std();
            }
        } else {
            RegionArray means{}, stds{};
            for (std::size_t r = 0; r < kRegionCount; ++r) {
                means[r] = result.estimates[r].mean;
                stds[r] = result.estimates[r].std;
            }
            const double loss = forward_loss(row, loss_units(means, scale));
            if (loss > 0.0) {
                double var = 0.0;
                for (std::size_t r = 0; r < kRegionCount; ++r) {
                    const double term = row[r] * stds[r] / scale[r];
                    var += term * term;
                }
                p.mean_q_tls = 1.0 / loss;
                p.std_q_tls = std::sqrt(var) / (loss * loss);
            } else {
                p.mean_q_tls = kInf;
            }
        }
        out.push_back(p);
    }
    return out;
}

std::vector<LossBudget> loss_budget(const ParticipationMatrix& matrix,
                                    const ExtractionResult& result,
                                    std::span<const EnsembleStats> measured) {
    const RegionArray& scale = result.config.region_scale;
    RegionArray means{};
    for (std::size_t r = 0; r < kRegionCount; ++r) means[r] = result.estimates[r].mean;
    const RegionArray tangents = loss_units(means, scale);

    std::vector<LossBudget> out;
    out.reserve(matrix.row_count());
    for (std::size_t i = 0; i < matrix.row_count(); ++i) {
        const DesignId& id = matrix.designs[i];
        const auto it = std::find_if(measured.begin(), measured.end(),
                                     [&](const EnsembleStats& s) { return s.design == id; });
        if (it == measured.end())
            throw DomainError("loss_budget: no measured stats for " + to_string(id));
        LossBudget b;
        b.design = id;
        b.measured_total_loss = 1.0 / it->mean_q_tls;
        for (std::size_t r = 0; r < kRegionCount; ++r) {
            b.per_region_loss[r] = matrix.row(i)[r] * tangents[r];
            b.predicted_total_loss += b.per_region_loss[r];
        }
        out.push_back(b);
    }
    return out;
}

void write_predict_report(const std::filesystem::path& path,
                          std::span<const PredictedQ> predicted,
                          std::span<const EnsembleStats> measured) {
    json pred = json::array();
    for (const PredictedQ& p : predicted) {
        json j = design_fields(p.design);
        j["mean_q_tls"] = p.mean_q_tls;
        j["std_q_tls"] = p.std_q_tls;
        pred.push_back(std::move(j));
    }
    json meas = json::array();
    for (const EnsembleStats& s : measured) {
        json j = design_fields(s.design);
        j["mean_q_tls"] = s.mean_q_tls;
        j["std_err_q_tls"] = s.std_err_q_tls;
        j["n_resonators"] = s.n_resonators;
        meas.push_back(std::move(j));
    }
    dump_to(path, json{{"generated_by", kGeneratedBy},
                       {"predicted_q", std::move(pred)},
                       {"measured_q", std::move(meas)}});
}

void write_budget_report(const std::filesystem::path& path,
                         std::span<const LossBudget> budgets) {
    json arr = json::array();
    for (const LossBudget& b : budgets) {
        json j = design_fields(b.design);
        j["measured_total_loss"] = b.measured_total_loss;
        j["predicted_total_loss"] = b.predicted_total_loss;
        json comp;
        for (Region r : kRegions)
            comp[std::string(to_string(r))] = b.per_region_loss[region_index(r)];
        j["per_region_loss"] = std::move(comp);
        arr.push_back(std::move(j));
    }
    dump_to(path, json{{"generated_by", kGeneratedBy}, {"budgets", std::move(arr)}});
}

}  // namespace slx
