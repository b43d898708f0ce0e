#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slx/bounds.hpp"
#include "slx/core.hpp"
#include "slx/errors.hpp"
#include "slx/ingest.hpp"
#include "slx/predict.hpp"
#include "slx/qtls.hpp"
#include "slx/sle.hpp"
#include "slx/svg.hpp"
#include "slx/synth.hpp"
#include "slx/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace slx;

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kIo = 3,
    kParse = 4,
    kValidation = 5,
    kDomain = 6,
};

// Table-1 style per-region presentation scales.
constexpr double kTableScale[kRegionCount] = {1e-4, 1e-3, 1e-3, 1e-7};
const char* kTableScaleLabel[kRegionCount] = {"×10⁻⁴", "×10⁻³",
                                              "×10⁻³", "×10⁻⁷"};

struct CommonOpts {
    std::string matrix;        // path or bundled:<set>
    std::string measurements;  // CSV path
    std::vector<std::string> datasets;
    std::string units = "percent";
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool strict = false;
    bool svg = false;
    std::string out_dir = ".";
    std::vector<std::string> scales;
    double resolve_sigma = 2.0;
    bool no_std_over_mean = false;
};

void add_input_options(CLI::App* cmd, CommonOpts& o, bool with_measurements) {
    cmd->add_option("--matrix", o.matrix,
                    "participation matrix CSV, or bundled:{tin,tin-hf,al,al-hf}");
    cmd->add_option("--units", o.units, "matrix units: percent|fraction")
        ->capture_default_str();
    if (with_measurements) {
        cmd->add_option("--measurements", o.measurements, "measurements CSV");
        cmd->add_option("--dataset", o.datasets, "JSON dataset envelope (matrix + measurements)");
        cmd->add_flag("--strict", o.strict, "treat flagged/rejected measurements as errors");
    }
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

void add_extraction_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--samples", o.samples, "Monte-Carlo sample count")->capture_default_str();
    cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
    cmd->add_option("--scale", o.scales,
                    "per-region loss-factor scale, e.g. --scale MS=1.0 (repeatable)");
    cmd->add_option("--resolve-sigma", o.resolve_sigma,
                    "sigma multiplier of the resolvability rule")
        ->capture_default_str();
    cmd->add_flag("--no-std-over-mean", o.no_std_over_mean,
                  "do not flag estimates whose std exceeds the mean");
}

Units parse_units(const std::string& s) {
    const auto u = units_from_string(s);
    if (!u) throw ValidationError("unknown units \"" + s + "\" (expected percent|fraction)");
    return *u;
}

double parse_number_flag(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bad numeric value \"" + text + "\" for " + flag);
    }
}

ParticipationMatrix load_matrix(const std::string& spec, Units units) {
    if (spec.rfind("bundled:", 0) == 0) {
        const auto set = reference_set_from_string(spec.substr(8));
        if (!set)
            throw ValidationError("unknown bundled matrix \"" + spec +
                                  "\" (expected bundled:{tin,tin-hf,al,al-hf})");
        return reference_matrix(*set);
    }
    return read_participation(spec, units);
}

ExtractionConfig make_config(const CommonOpts& o) {
    ExtractionConfig cfg;
    cfg.n_samples = o.samples;
    cfg.rng_seed = o.seed;
    cfg.participation_units = parse_units(o.units);
    cfg.resolvability_rule.sigma_multiplier = o.resolve_sigma;
    cfg.resolvability_rule.unresolvable_if_std_exceeds_mean = !o.no_std_over_mean;
    for (const std::string& s : o.scales) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("bad --scale value \"" + s + "\" (expected REGION=VALUE)");
        const auto region = region_from_string(s.substr(0, eq));
        if (!region) throw ValidationError("unknown region in --scale \"" + s + "\"");
        cfg.region_scale[region_index(*region)] = parse_number_flag(s.substr(eq + 1), "--scale");
    }
    cfg.validate();
    return cfg;
}

void report_measurement_quality(const MeasurementSet& set, bool strict) {
    if (set.clean()) return;
    if (strict)
        throw ValidationError(std::to_string(set.flagged.size()) + " flagged and " +
                              std::to_string(set.rejected.size()) +
                              " rejected measurement(s) present in strict mode");
    for (const auto& f : set.flagged)
        std::cerr << "warning: excluded " << f.record.resonator_id << " ("
                  << to_string(f.record.design) << "): " << f.reason << "\n";
    for (const auto& r : set.rejected)
        std::cerr << "warning: rejected record at line " << r.line << ": " << r.reason << "\n";
}

Dataset load_one_dataset(const CommonOpts& o, const std::string& dataset_path) {
    Dataset ds;
    if (!dataset_path.empty()) {
        if (!o.matrix.empty() || !o.measurements.empty())
            throw ValidationError("--dataset cannot be combined with --matrix/--measurements");
        ds = read_dataset_json(dataset_path);
    } else {
        if (o.matrix.empty() || o.measurements.empty())
            throw ValidationError("either --dataset or both --matrix and --measurements are required");
        ds.matrix = load_matrix(o.matrix, parse_units(o.units));
        ds.measurements = read_measurements(o.measurements);
        validate_dataset(ds);
    }
    report_measurement_quality(ds.measurements, o.strict);
    return ds;
}

Dataset load_dataset(const CommonOpts& o) {
    if (o.datasets.size() > 1)
        throw ValidationError("only the budget subcommand accepts multiple datasets");
    return load_one_dataset(o, o.datasets.empty() ? std::string{} : o.datasets.front());
}

struct PipelineRun {
    Dataset dataset;
    std::vector<EnsembleStats> stats;
    ExtractionResult result;
};

PipelineRun run_pipeline(Dataset ds, const CommonOpts& o, const ExtractionConfig& cfg) {
    PipelineRun run{std::move(ds), {}, {}};
    run.stats = ensemble_stats_all(run.dataset.measurements.accepted);
    ExecutionOptions exec;
    exec.threads = o.threads;
    run.result = extract(run.dataset.matrix, run.stats, cfg, exec);
    run.result = annotate_resolvability(std::move(run.result), run.dataset.matrix, run.stats);
    for (const std::string& w : run.result.warnings) std::cerr << "warning: " << w << "\n";
    return run;
}

void print_estimate_table(const ExtractionResult& result) {
    std::printf("Loss tangents\n");
    std::printf("%-8s%s\n", "Region", "Estimate");
    for (Region r : kRegions) {
        const auto idx = region_index(r);
        const LossTangentEstimate& e = result.estimates[idx];
        const double s = kTableScale[idx];
        if (e.resolvable)
            std::printf("%-8s%.1f ± %.1f (%s)\n", std::string(to_string(r)).c_str(),
                        e.mean / s, e.std / s, kTableScaleLabel[idx]);
        else
            std::printf("%-8s<%.1f (%s)\n", std::string(to_string(r)).c_str(),
                        *e.upper_bound / s, kTableScaleLabel[idx]);
    }
    std::printf("samples kept: %zu   condition: %.3g\n", result.samples_kept,
                result.condition_diagnostic);
}

fs::path out_file(const CommonOpts& o, const char* name) {
    fs::create_directories(o.out_dir);
    return fs::path(o.out_dir) / name;
}

int cmd_extract(const CommonOpts& o) {
    const ExtractionConfig cfg = make_config(o);
    PipelineRun run = run_pipeline(load_dataset(o), o, cfg);
    const fs::path path = out_file(o, "results.json");
    write_estimates(path, run.result.estimates, cfg);
    print_estimate_table(run.result);
    std::cerr << "wrote " << path.string() << "\n";
    return kOk;
}

int cmd_predict(const CommonOpts& o) {
    const ExtractionConfig cfg = make_config(o);
    PipelineRun run = run_pipeline(load_dataset(o), o, cfg);
    const auto predicted = predict_q(run.dataset.matrix, run.result);
    for (const auto& p : predicted)
        if (std::isinf(p.mean_q_tls))
            std::cerr << "warning: " << to_string(p.design)
                      << " has zero predicted loss in every sample (infinite Q)\n";
    write_predict_report(out_file(o, "predict.json"), predicted, run.stats);
    if (o.svg) {
        std::vector<ScatterPoint> points;
        for (const auto& p : predicted) {
            const auto it = std::find_if(run.stats.begin(), run.stats.end(),
                                         [&](const EnsembleStats& s) { return s.design == p.design; });
            if (it == run.stats.end()) continue;
            // Horizontal bars carry the 2x-std convention; vertical bars are
            // the standard error of the measured mean.
            points.push_back(ScatterPoint{std::string(to_string(p.design.design)), p.mean_q_tls,
                                          2.0 * p.std_q_tls, it->mean_q_tls,
                                          it->std_err_q_tls});
        }
        write_parity_scatter_svg(out_file(o, "predict.svg"), points, "Predicted Q_TLS",
                                 "Measured Q_TLS");
    }
    return kOk;
}

int cmd_budget(const CommonOpts& o) {
    const ExtractionConfig cfg = make_config(o);
    std::vector<std::string> dataset_paths = o.datasets;
    if (dataset_paths.empty()) dataset_paths.push_back({});

    std::vector<LossBudget> budgets;
    std::vector<BudgetBar> bars;
    for (const std::string& path : dataset_paths) {
        PipelineRun run = run_pipeline(load_one_dataset(o, path), o, cfg);
        for (LossBudget& b : loss_budget(run.dataset.matrix, run.result, run.stats)) {
            BudgetBar bar;
            bar.label = std::string(to_string(b.design.design)) + " " + b.design.material +
                        (b.design.process.empty() || b.design.process == "none"
                             ? ""
                             : "/" + b.design.process);
            bar.measured_total = b.measured_total_loss;
            bar.components = b.per_region_loss;
            bars.push_back(std::move(bar));
            budgets.push_back(std::move(b));
        }
    }
    write_budget_report(out_file(o, "budget.json"), budgets);
    if (o.svg)
        write_budget_bars_svg(out_file(o, "budget.svg"), bars, "Dielectric loss 1/Q_TLS");
    return kOk;
}

int cmd_bound(const CommonOpts& o, const std::string& region_name) {
    const auto region = region_from_string(region_name);
    if (!region) throw ValidationError("unknown region \"" + region_name + "\"");
    const ExtractionConfig cfg = make_config(o);
    PipelineRun run = run_pipeline(load_dataset(o), o, cfg);

    const DesignKind kind = accentuating_design(*region);
    const auto it = std::find_if(run.stats.begin(), run.stats.end(),
                                 [&](const EnsembleStats& s) { return s.design.design == kind; });
    if (it == run.stats.end())
        throw DomainError("no measurements for the accentuating " +
                          std::string(to_string(kind)));
    const double bound = upper_bound(run.dataset.matrix, *it, run.result.estimates, *region,
                                     cfg.region_scale);

    const auto idx = region_index(*region);
    std::printf("%s upper bound: %.2f (%s)\n", std::string(to_string(*region)).c_str(),
                bound / kTableScale[idx], kTableScaleLabel[idx]);

    nlohmann::json j{{"generated_by", kGeneratedBy},
                     {"region", std::string(to_string(*region))},
                     {"upper_bound", bound},
                     {"accentuating_design",
                      {{"design", std::string(to_string(it->design.design))},
                       {"material", it->design.material},
                       {"process", it->design.process},
                       {"mean_q_tls", it->mean_q_tls},
                       {"std_err_q_tls", it->std_err_q_tls}}}};
    const fs::path path = out_file(o, "bound.json");
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << j.dump(2) << "\n";
    return kOk;
}

int cmd_synth(const CommonOpts& o, const std::string& tangents_csv,
              const std::string& tangents_ref, std::size_t n_per_design, double noise,
              const std::string& qhp_text) {
    if (o.matrix.empty()) throw ValidationError("synth requires --matrix");
    SynthSpec spec;
    spec.matrix = load_matrix(o.matrix, parse_units(o.units));
    spec.n_per_design = n_per_design;
    spec.relative_noise = noise;
    spec.rng_seed = o.seed;

    if (tangents_csv.empty() == tangents_ref.empty())
        throw ValidationError("exactly one of --tangents or --tangents-ref is required");
    if (!tangents_ref.empty()) {
        const auto set = reference_set_from_string(tangents_ref);
        if (!set) throw ValidationError("unknown reference set \"" + tangents_ref + "\"");
        spec.true_tangents = reference_tangents(*set).tangents;
    } else {
        std::istringstream is(tangents_csv);
        std::string field;
        std::size_t i = 0;
        while (std::getline(is, field, ',')) {
            if (i >= kRegionCount) throw ValidationError("--tangents expects 4 values");
            spec.true_tangents[i++] = parse_number_flag(field, "--tangents");
        }
        if (i != kRegionCount)
            throw ValidationError("--tangents expects 4 comma-separated values (MS,SA,MA,Si)");
    }

    if (qhp_text == "inf")
        spec.q_hp.reset();
    else
        spec.q_hp = parse_number_flag(qhp_text, "--qhp");

    const auto records = generate(spec);
    const fs::path path = out_file(o, "synthetic.csv");
    write_measurements(path, records);
    std::cerr << "wrote " << records.size() << " records to " << path.string() << "\n";
    return kOk;
}

int cmd_datasets(const CommonOpts& o) {
    fs::create_directories(o.out_dir);
    for (ReferenceSet set : kReferenceSets) {
        const fs::path path =
            fs::path(o.out_dir) / ("participation_" + std::string(to_string(set)) + ".csv");
        write_participation(path, reference_matrix(set), Units::Percent);
        std::cerr << "wrote " << path.string() << "\n";
    }
    nlohmann::json sets;
    for (ReferenceSet set : kReferenceSets) {
        const ReferenceTangents& ref = reference_tangents(set);
        nlohmann::json per_region;
        for (Region r : kRegions) {
            const auto idx = region_index(r);
            per_region[std::string(to_string(r))] = {{"value", ref.tangents[idx]},
                                                     {"is_upper_bound", ref.is_upper_bound[idx]}};
        }
        sets[std::string(to_string(set))] = std::move(per_region);
    }
    const fs::path path = fs::path(o.out_dir) / "reference_tangents.json";
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << nlohmann::json{{"generated_by", kGeneratedBy}, {"loss_tangents", std::move(sets)}}
              .dump(2)
       << "\n";
    std::cerr << "wrote " << path.string() << "\n";
    return kOk;
}

int cmd_validate(const CommonOpts& o) {
    const ParticipationMatrix m = load_matrix(o.matrix, parse_units(o.units));
    // read_participation already rejects invalid files; reaching here means clean.
    std::printf("OK: %zu designs, condition %.3g\n", m.row_count(), condition_number(m));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surface-loss extraction for superconducting CPW resonators"};
    app.set_version_flag("--version", std::string(kGeneratedBy));
    app.require_subcommand(1);

    CommonOpts opts;
    std::string bound_region;
    std::string synth_tangents, synth_tangents_ref, synth_qhp = "inf";
    std::size_t synth_n = 30;
    double synth_noise = 0.0;

    CLI::App* extract = app.add_subcommand("extract", "extract per-region loss tangents");
    add_input_options(extract, opts, true);
    add_extraction_options(extract, opts);

    CLI::App* predict = app.add_subcommand("predict", "predict Q_TLS per design from the fit");
    add_input_options(predict, opts, true);
    add_extraction_options(predict, opts);
    predict->add_flag("--svg", opts.svg, "emit measured-vs-predicted scatter SVG");

    CLI::App* budget = app.add_subcommand("budget", "per-design loss decomposition");
    add_input_options(budget, opts, true);
    add_extraction_options(budget, opts);
    budget->add_flag("--svg", opts.svg, "emit grouped-bar SVG");

    CLI::App* bound = app.add_subcommand("bound", "upper bound for one region's loss tangent");
    add_input_options(bound, opts, true);
    add_extraction_options(bound, opts);
    bound->add_option("--region", bound_region, "target region (MS|SA|MA|Si)")->required();

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic measurements");
    add_input_options(synth, opts, false);
    synth->add_option("--tangents", synth_tangents, "true tangents MS,SA,MA,Si");
    synth->add_option("--tangents-ref", synth_tangents_ref,
                      "bundled tangent set: tin|tin-hf|al|al-hf");
    synth->add_option("--n-per-design", synth_n, "resonators per design")->capture_default_str();
    synth->add_option("--noise", synth_noise, "relative Q_TLS dispersion in [0,1)")
        ->capture_default_str();
    synth->add_option("--qhp", synth_qhp, "high-power Q model: inf or a value")
        ->capture_default_str();
    synth->add_option("--seed", opts.seed, "RNG seed")->capture_default_str();

    CLI::App* datasets = app.add_subcommand("datasets", "export the bundled reference data");
    datasets->add_option("--out", opts.out_dir, "output directory")->capture_default_str();

    CLI::App* validate = app.add_subcommand("validate", "validate a participation matrix");
    validate->add_option("--matrix", opts.matrix, "matrix CSV or bundled:<set>")->required();
    validate->add_option("--units", opts.units, "percent|fraction")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_extract(opts);
        if (predict->parsed()) return cmd_predict(opts);
        if (budget->parsed()) return cmd_budget(opts);
        if (bound->parsed()) return cmd_bound(opts, bound_region);
        if (synth->parsed())
            return cmd_synth(opts, synth_tangents, synth_tangents_ref, synth_n, synth_noise,
                             synth_qhp);
        if (datasets->parsed()) return cmd_datasets(opts);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
