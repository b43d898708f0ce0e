#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slx {

// The four dielectric regions of a trenched CPW cross-section. The enum
// order is canonical: every matrix column, serialized row and report table
// follows MS, SA, MA, Si.
enum class Region : int { MS = 0, SA = 1, MA = 2, Si = 3 };

inline constexpr std::array<Region, 4> kRegions = {Region::MS, Region::SA, Region::MA,
                                                   Region::Si};
inline constexpr std::size_t kRegionCount = 4;

constexpr std::size_t region_index(Region r) { return static_cast<std::size_t>(r); }

std::string_view to_string(Region r);
std::optional<Region> region_from_string(std::string_view name);

// Per-region quantities indexed in canonical order.
using RegionArray = std::array<double, kRegionCount>;

// Resonator geometry families, each engineered to accentuate one region's
// participation relative to the others.
enum class DesignKind : int { MSDesign = 0, SADesign = 1, MADesign = 2, SiDesign = 3 };

inline constexpr std::array<DesignKind, 4> kDesignKinds = {
    DesignKind::MSDesign, DesignKind::SADesign, DesignKind::MADesign, DesignKind::SiDesign};

std::string_view to_string(DesignKind d);
// Accepts the canonical names ("MS design") case-insensitively, with or
// without the separating space/underscore/hyphen.
std::optional<DesignKind> design_kind_from_string(std::string_view name);

// The region a given design accentuates, and vice versa. The mapping is
// fixed by the design naming and is not configurable.
constexpr Region accentuated_region(DesignKind d) { return static_cast<Region>(d); }
constexpr DesignKind accentuating_design(Region r) { return static_cast<DesignKind>(r); }

// Identifies one device set: geometry family plus free-form material and
// process labels ("TiN"/"HF"). The triple is unique within a dataset.
struct DesignId {
    DesignKind design = DesignKind::MSDesign;
    std::string material;
    std::string process;

    friend bool operator==(const DesignId&, const DesignId&) = default;
    friend auto operator<=>(const DesignId&, const DesignId&) = default;
};

// "MS design/TiN/none" — used in diagnostics and violation messages.
std::string to_string(const DesignId& id);

// Stable 64-bit hash of the identifying triple. Used to key RNG streams so
// draws follow the design, not its row position.
std::uint64_t design_hash(const DesignId& id);

// Designs x regions table of electric-field participation fractions.
// Values are stored as fractions (percent is a parse-time conversion).
struct ParticipationMatrix {
    std::vector<DesignId> designs;
    std::vector<RegionArray> values;  // one entry per design, canonical region order

    std::size_t row_count() const { return designs.size(); }
    double at(std::size_t row, Region r) const { return values[row][region_index(r)]; }
    const RegionArray& row(std::size_t i) const { return values[i]; }

    std::optional<std::size_t> find_row(const DesignId& id) const;
    // First row of the given geometry family, material/process ignored.
    std::optional<std::size_t> find_row(DesignKind kind) const;
};

// One rule violation found by validate_matrix. `rule` is a short stable
// slug; `where` names the offending row/column when applicable.
struct Violation {
    std::string rule;
    std::string where;

    std::string message() const { return where.empty() ? rule : rule + " (" + where + ")"; }
};

// Checks all ParticipationMatrix invariants: non-negative entries, row sums
// <= 1, at least one row, no duplicate design triples, finite values.
// Returns an empty list iff the matrix is valid. Never throws.
std::vector<Violation> validate_matrix(const ParticipationMatrix& m);

// Internal quality factors of one resonator at single-photon and high
// circulating power. q_hp may be +infinity ("no power dependence" sentinel).
struct ResonatorMeasurement {
    DesignId design;
    std::string resonator_id;
    double q_lp = 0.0;
    double q_hp = 0.0;

    friend bool operator==(const ResonatorMeasurement&, const ResonatorMeasurement&) = default;
};

// Per-design ensemble statistics of the TLS-limited quality factor.
// std_err_q_tls is the standard error of the mean over n_resonators.
struct EnsembleStats {
    DesignId design;
    double mean_q_tls = 0.0;
    double std_err_q_tls = 0.0;
    std::size_t n_resonators = 0;
};

// Extraction output for one region. `mean`/`std` are always the raw
// Monte-Carlo moments; when the region is statistically unresolvable, an
// upper bound is attached and presentation layers print "<bound" instead.
// Invariant: upper_bound is present iff resolvable is false, and positive.
struct LossTangentEstimate {
    Region region = Region::MS;
    double mean = 0.0;
    double std = 0.0;
    bool resolvable = true;
    std::optional<double> upper_bound;
};

// A region is unresolvable when zero lies inside the sigma_multiplier
// interval around the mean, or (optionally) when std exceeds the mean.
struct ResolvabilityRule {
    double sigma_multiplier = 2.0;
    bool unresolvable_if_std_exceeds_mean = true;

    friend bool operator==(const ResolvabilityRule&, const ResolvabilityRule&) = default;
};

enum class Units { Percent, Fraction };

std::string_view to_string(Units u);
std::optional<Units> units_from_string(std::string_view name);

// Knobs of the Monte-Carlo extraction. region_scale holds the per-region
// loss-factor -> loss-tangent conversion; the bundled matrices are taken as
// already incorporating the published thickness/permittivity assumptions,
// so it defaults to identity.
struct ExtractionConfig {
    std::size_t n_samples = 10000;
    std::uint64_t rng_seed = 0;
    Units participation_units = Units::Percent;
    ResolvabilityRule resolvability_rule;
    RegionArray region_scale = {1.0, 1.0, 1.0, 1.0};

    // Throws ValidationError on n_samples == 0 or non-positive scales.
    void validate() const;
};

}  // namespace slx
