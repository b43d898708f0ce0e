#include "slx/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slx/errors.hpp"
#include "slx/version.hpp"

namespace slx {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

double parse_double(const std::string& field, const std::string& file, std::size_t line) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("not a number: \"" + field + "\"", file, line);
    return value;
}

// Non-empty lines with their 1-based numbers; header is the first one.
struct CsvFile {
    std::string path;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    CsvFile out;
    out.path = path.string();
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line)) {
        ++number;
        if (trim(line).empty()) continue;
        out.rows.emplace_back(number, split_csv_line(line));
    }
    if (out.rows.empty()) throw ParseError("empty file", out.path, 0);
    return out;
}

// Maps each expected column name to its position. Unknown or missing
// columns are errors; order is free.
std::map<std::string, std::size_t> index_header(const CsvFile& file,
                                                std::span<const std::string_view> expected) {
    const auto& [line, fields] = file.rows.front();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& name = fields[i];
        const bool known =
            std::find(expected.begin(), expected.end(), name) != expected.end();
        if (!known) throw ParseError("unknown column \"" + name + "\"", file.path, line);
        if (index.count(name))
            throw ParseError("duplicate column \"" + name + "\"", file.path, line);
        index[name] = i;
    }
    for (std::string_view name : expected)
        if (!index.count(std::string(name)))
            throw ParseError("missing column \"" + std::string(name) + "\"", file.path, line);
    return index;
}

DesignId parse_design(const std::vector<std::string>& fields,
                      const std::map<std::string, std::size_t>& col, const std::string& file,
                      std::size_t line) {
    const std::string& name = fields[col.at("design")];
    const auto kind = design_kind_from_string(name);
    if (!kind) throw ParseError("unknown design \"" + name + "\"", file, line);
    return DesignId{*kind, fields[col.at("material")], fields[col.at("process")]};
}

void check_field_count(const std::vector<std::string>& fields, std::size_t expected,
                       const std::string& file, std::size_t line) {
    if (fields.size() != expected)
        throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                             std::to_string(fields.size()),
                         file, line);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void require_stream(const std::ofstream& os, const std::filesystem::path& path) {
    if (!os) throw IoError("cannot write " + path.string());
}

constexpr std::array<std::string_view, 7> kMatrixColumns = {"design",  "material", "process",
                                                            "MS",      "SA",       "MA",
                                                            "Si"};
constexpr std::array<std::string_view, 6> kMeasurementColumns = {
    "design", "material", "process", "resonator_id", "q_lp", "q_hp"};

json config_to_json(const ExtractionConfig& c) {
    json scale;
    for (Region r : kRegions)
        scale[std::string(to_string(r))] = c.region_scale[region_index(r)];
    return json{{"n_samples", c.n_samples},
                {"rng_seed", c.rng_seed},
                {"participation_units", std::string(to_string(c.participation_units))},
                {"resolvability_rule",
                 {{"sigma_multiplier", c.resolvability_rule.sigma_multiplier},
                  {"std_over_mean", c.resolvability_rule.unresolvable_if_std_exceeds_mean}}},
                {"region_scale", std::move(scale)},
                {"upper_bound_policy", "two-sigma minima clamped at zero"}};
}

ExtractionConfig config_from_json(const json& j) {
    ExtractionConfig c;
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (const auto u = units_from_string(j.at("participation_units").get<std::string>()))
        c.participation_units = *u;
    const auto& rule = j.at("resolvability_rule");
    c.resolvability_rule.sigma_multiplier = rule.at("sigma_multiplier").get<double>();
    c.resolvability_rule.unresolvable_if_std_exceeds_mean =
        rule.at("std_over_mean").get<bool>();
    for (Region r : kRegions)
        c.region_scale[region_index(r)] =
            j.at("region_scale").at(std::string(to_string(r))).get<double>();
    return c;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), path.string(), 0);
    }
}

}  // namespace

void validate_dataset(const Dataset& ds) {
    auto check = [&](const ResonatorMeasurement& m) {
        if (!ds.matrix.find_row(m.design))
            throw ValidationError("measurement " + m.resonator_id + " references " +
                                  to_string(m.design) + ", which is not a matrix row");
    };
    for (const auto& m : ds.measurements.accepted) check(m);
    for (const auto& f : ds.measurements.flagged) check(f.record);
}

ParticipationMatrix read_participation(const std::filesystem::path& path, Units units) {
    const CsvFile file = read_csv(path);
    const auto col = index_header(file, kMatrixColumns);
    const double divisor = units == Units::Percent ? 100.0 : 1.0;

    ParticipationMatrix m;
    for (std::size_t i = 1; i < file.rows.size(); ++i) {
        const auto& [line, fields] = file.rows[i];
        check_field_count(fields, col.size(), file.path, line);
        m.designs.push_back(parse_design(fields, col, file.path, line));
        RegionArray row{};
        for (Region r : kRegions) {
            const double raw =
                parse_double(fields[col.at(std::string(to_string(r)))], file.path, line);
            row[region_index(r)] = raw / divisor;
        }
        m.values.push_back(row);
    }

    if (const auto violations = validate_matrix(m); !violations.empty()) {
        std::string msg = "invalid participation matrix in " + file.path + ":";
        for (const auto& v : violations) msg += "\n  - " + v.message();
        throw ValidationError(msg);
    }
    return m;
}

void write_participation(const std::filesystem::path& path, const ParticipationMatrix& m,
                         Units units) {
    std::ofstream os(path);
    require_stream(os, path);
    os << "design,material,process,MS,SA,MA,Si\n";
    const double factor = units == Units::Percent ? 100.0 : 1.0;
    for (std::size_t i = 0; i < m.row_count(); ++i) {
        const DesignId& id = m.designs[i];
        os << to_string(id.design) << "," << id.material << "," << id.process;
        for (Region r : kRegions) os << "," << format_double(m.at(i, r) * factor);
        os << "\n";
    }
    require_stream(os, path);
}

MeasurementSet read_measurements(const std::filesystem::path& path) {
    const CsvFile file = read_csv(path);
    const auto col = index_header(file, kMeasurementColumns);

    MeasurementSet set;
    for (std::size_t i = 1; i < file.rows.size(); ++i) {
        const auto& [line, fields] = file.rows[i];
        check_field_count(fields, col.size(), file.path, line);
        ResonatorMeasurement rec;
        rec.design = parse_design(fields, col, file.path, line);
        rec.resonator_id = fields[col.at("resonator_id")];
        rec.q_lp = parse_double(fields[col.at("q_lp")], file.path, line);
        rec.q_hp = parse_double(fields[col.at("q_hp")], file.path, line);

        if (std::isinf(rec.q_lp)) {
            set.rejected.push_back({line, "non-finite Q_LP"});
        } else if (std::isnan(rec.q_lp) || std::isnan(rec.q_hp) || !(rec.q_lp > 0.0) ||
                   !(rec.q_hp > 0.0)) {
            set.rejected.push_back({line, "non-positive Q"});
        } else if (rec.q_hp < rec.q_lp) {
            set.flagged.push_back({std::move(rec), "Q_HP < Q_LP"});
        } else if (rec.q_hp == rec.q_lp) {
            set.flagged.push_back({std::move(rec), "Q_HP = Q_LP"});
        } else {
            set.accepted.push_back(std::move(rec));
        }
    }
    return set;
}

void write_measurements(const std::filesystem::path& path,
                        std::span<const ResonatorMeasurement> records) {
    std::ofstream os(path);
    require_stream(os, path);
    os << "design,material,process,resonator_id,q_lp,q_hp\n";
    for (const auto& r : records) {
        os << to_string(r.design.design) << "," << r.design.material << ","
           << r.design.process << "," << r.resonator_id << "," << format_double(r.q_lp)
           << "," << format_double(r.q_hp) << "\n";
    }
    require_stream(os, path);
}

Dataset read_dataset_json(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    Dataset ds;
    try {
        if (j.contains("metadata"))
            for (const auto& [k, v] : j.at("metadata").items())
                ds.metadata[k] = v.get<std::string>();

        const json& matrix = j.at("matrix");
        Units units = Units::Fraction;
        if (matrix.contains("units")) {
            const auto u = units_from_string(matrix.at("units").get<std::string>());
            if (!u) throw ParseError("unknown units in matrix", path.string(), 0);
            units = *u;
        }
        const double divisor = units == Units::Percent ? 100.0 : 1.0;
        for (const json& row : matrix.at("rows")) {
            const auto kind = design_kind_from_string(row.at("design").get<std::string>());
            if (!kind) throw ParseError("unknown design in matrix rows", path.string(), 0);
            ds.matrix.designs.push_back(DesignId{*kind, row.at("material").get<std::string>(),
                                                 row.at("process").get<std::string>()});
            RegionArray values{};
            for (Region r : kRegions)
                values[region_index(r)] =
                    row.at(std::string(to_string(r))).get<double>() / divisor;
            ds.matrix.values.push_back(values);
        }

        if (j.contains("measurements")) {
            for (const json& rec : j.at("measurements")) {
                const auto kind =
                    design_kind_from_string(rec.at("design").get<std::string>());
                if (!kind)
                    throw ParseError("unknown design in measurements", path.string(), 0);
                ResonatorMeasurement m;
                m.design = DesignId{*kind, rec.at("material").get<std::string>(),
                                    rec.at("process").get<std::string>()};
                m.resonator_id = rec.at("resonator_id").get<std::string>();
                m.q_lp = rec.at("q_lp").get<double>();
                const json& qhp = rec.at("q_hp");
                m.q_hp = qhp.is_string() && qhp.get<std::string>() == "inf"
                             ? std::numeric_limits<double>::infinity()
                             : qhp.get<double>();
                if (!(m.q_lp > 0.0) || !(m.q_hp > 0.0) || std::isinf(m.q_lp))
                    ds.measurements.rejected.push_back({0, "non-positive Q"});
                else if (m.q_hp < m.q_lp)
                    ds.measurements.flagged.push_back({std::move(m), "Q_HP < Q_LP"});
                else if (m.q_hp == m.q_lp)
                    ds.measurements.flagged.push_back({std::move(m), "Q_HP = Q_LP"});
                else
                    ds.measurements.accepted.push_back(std::move(m));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad dataset envelope: ") + e.what(), path.string(), 0);
    }

    if (const auto violations = validate_matrix(ds.matrix); !violations.empty())
        throw ValidationError("invalid participation matrix in " + path.string() + ": " +
                              violations.front().message());
    validate_dataset(ds);
    return ds;
}

void write_dataset_json(const std::filesystem::path& path, const Dataset& ds) {
    json rows = json::array();
    for (std::size_t i = 0; i < ds.matrix.row_count(); ++i) {
        const DesignId& id = ds.matrix.designs[i];
        json row{{"design", std::string(to_string(id.design))},
                 {"material", id.material},
                 {"process", id.process}};
        for (Region r : kRegions) row[std::string(to_string(r))] = ds.matrix.at(i, r);
        rows.push_back(std::move(row));
    }
    json measurements = json::array();
    auto record_to_json = [](const ResonatorMeasurement& m) {
        json rec{{"design", std::string(to_string(m.design.design))},
                 {"material", m.design.material},
                 {"process", m.design.process},
                 {"resonator_id", m.resonator_id},
                 {"q_lp", m.q_lp}};
        if (std::isinf(m.q_hp))
            rec["q_hp"] = "inf";
        else
            rec["q_hp"] = m.q_hp;
        return rec;
    };
    for (const auto& m : ds.measurements.accepted) measurements.push_back(record_to_json(m));
    for (const auto& f : ds.measurements.flagged)
        measurements.push_back(record_to_json(f.record));

    const json j{{"metadata", ds.metadata},
                 {"matrix", {{"units", "fraction"}, {"rows", std::move(rows)}}},
                 {"measurements", std::move(measurements)}};
    std::ofstream os(path);
    require_stream(os, path);
    os << j.dump(2) << "\n";
    require_stream(os, path);
}

void write_estimates(const std::filesystem::path& path,
                     std::span<const LossTangentEstimate> estimates,
                     const ExtractionConfig& provenance) {
    if (estimates.empty()) throw ValidationError("write_estimates: empty estimate list");
    json arr = json::array();
    for (const LossTangentEstimate& e : estimates) {
        json row{{"region", std::string(to_string(e.region))},
                 {"mean", e.mean},
                 {"std", e.std},
                 {"resolvable", e.resolvable}};
        if (e.upper_bound)
            row["upper_bound"] = *e.upper_bound;
        else
            row["upper_bound"] = nullptr;
        arr.push_back(std::move(row));
    }
    const json j{{"config", config_to_json(provenance)},
                 {"estimates", std::move(arr)},
                 {"generated_by", kGeneratedBy}};
    std::ofstream os(path);
    require_stream(os, path);
    os << j.dump(2) << "\n";
    require_stream(os, path);
}

ResultsFile read_estimates(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    ResultsFile out;
    try {
        out.generated_by = j.at("generated_by").get<std::string>();
        out.config = config_from_json(j.at("config"));
        for (const json& row : j.at("estimates")) {
            LossTangentEstimate e;
            const auto region = region_from_string(row.at("region").get<std::string>());
            if (!region) throw ParseError("unknown region in estimates", path.string(), 0);
            e.region = *region;
            e.mean = row.at("mean").get<double>();
            e.std = row.at("std").get<double>();
            e.resolvable = row.at("resolvable").get<bool>();
            if (row.contains("upper_bound") && !row.at("upper_bound").is_null())
                e.upper_bound = row.at("upper_bound").get<double>();
            out.estimates.push_back(e);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad results file: ") + e.what(), path.string(), 0);
    }
    return out;
}

}  // namespace slx
