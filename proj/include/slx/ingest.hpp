#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "slx/core.hpp"

namespace slx {

// A structurally valid record whose Q pair fails the saturation check
// (q_hp <= q_lp). Surfaced, never silently dropped; callers decide.
struct FlaggedMeasurement {
    ResonatorMeasurement record;
    std::string reason;
};

// A record that cannot enter the data model at all (non-positive or
// non-finite Q). Carries its source line for diagnostics.
struct RejectedRecord {
    std::size_t line = 0;
    std::string reason;
};

struct MeasurementSet {
    std::vector<ResonatorMeasurement> accepted;
    std::vector<FlaggedMeasurement> flagged;
    std::vector<RejectedRecord> rejected;

    bool clean() const { return flagged.empty() && rejected.empty(); }
};

// One matrix plus its measurements and free-form provenance.
struct Dataset {
    ParticipationMatrix matrix;
    MeasurementSet measurements;
    std::map<std::string, std::string> metadata;
};

// Throws ValidationError when a measurement's design is not a matrix row.
void validate_dataset(const Dataset& ds);

// --- CSV formats -----------------------------------------------------------
//
// Matrix:       design,material,process,MS,SA,MA,Si
// Measurements: design,material,process,resonator_id,q_lp,q_hp
//
// Header required; column order free but the set is exact (unknown or
// missing columns are errors). Values are plain or scientific decimal;
// q_hp accepts "inf" as the no-power-dependence sentinel.

// Reads a matrix, converting from `units` to fractions, and validates it.
// Throws IoError / ParseError / ValidationError.
ParticipationMatrix read_participation(const std::filesystem::path& path, Units units);

// Writes in `units`. Fraction output round-trips every double bit-exactly
// (shortest-round-trip formatting); percent output is for table-style
// interchange and may differ by one ulp after a round trip.
void write_participation(const std::filesystem::path& path, const ParticipationMatrix& m,
                         Units units);

MeasurementSet read_measurements(const std::filesystem::path& path);
void write_measurements(const std::filesystem::path& path,
                        std::span<const ResonatorMeasurement> records);

// --- JSON envelope ----------------------------------------------------------
// {"metadata": {...}, "matrix": {"units": "...", "rows": [...]},
//  "measurements": [...]}; infinite q_hp is the string "inf".
Dataset read_dataset_json(const std::filesystem::path& path);
void write_dataset_json(const std::filesystem::path& path, const Dataset& ds);

// --- Results ----------------------------------------------------------------
// Top-level keys: "config", "estimates", "generated_by". Estimates carry
// region, mean, std, resolvable, upper_bound (null when resolvable) in
// canonical region order. Output is byte-stable for identical inputs.
void write_estimates(const std::filesystem::path& path,
                     std::span<const LossTangentEstimate> estimates,
                     const ExtractionConfig& provenance);

struct ResultsFile {
    std::vector<LossTangentEstimate> estimates;
    ExtractionConfig config;
    std::string generated_by;
};

ResultsFile read_estimates(const std::filesystem::path& path);

// --- Bundled reference data --------------------------------------------------
// The four published device sets: participation matrices (supplement tables)
// and the corresponding loss-tangent vectors (results table; entries that
// were only bounded carry the bound value and are marked).

enum class ReferenceSet { TiN, TiNHF, Al, AlHF };

inline constexpr std::array<ReferenceSet, 4> kReferenceSets = {
    ReferenceSet::TiN, ReferenceSet::TiNHF, ReferenceSet::Al, ReferenceSet::AlHF};

std::string_view to_string(ReferenceSet s);
std::optional<ReferenceSet> reference_set_from_string(std::string_view name);

const ParticipationMatrix& reference_matrix(ReferenceSet s);

struct ReferenceTangents {
    RegionArray tangents{};
    std::array<bool, kRegionCount> is_upper_bound{};  // true where only a bound was published
};

const ReferenceTangents& reference_tangents(ReferenceSet s);

}  // namespace slx
