#include "slx/core.hpp"

#include <cctype>
#include <cmath>

#include "slx/errors.hpp"

namespace slx {

namespace {

std::string normalize_token(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string_view to_string(Region r) {
    switch (r) {
        case Region::MS: return "MS";
        case Region::SA: return "SA";
        case Region::MA: return "MA";
        case Region::Si: return "Si";
    }
    return "?";
}

std::optional<Region> region_from_string(std::string_view name) {
    const std::string n = normalize_token(name);
    if (n == "ms") return Region::MS;
    if (n == "sa") return Region::SA;
    if (n == "ma") return Region::MA;
    if (n == "si") return Region::Si;
    return std::nullopt;
}

std::string_view to_string(DesignKind d) {
    switch (d) {
        case DesignKind::MSDesign: return "MS design";
        case DesignKind::SADesign: return "SA design";
        case DesignKind::MADesign: return "MA design";
        case DesignKind::SiDesign: return "Si design";
    }
    return "?";
}

std::optional<DesignKind> design_kind_from_string(std::string_view name) {
    const std::string n = normalize_token(name);
    if (n == "msdesign") return DesignKind::MSDesign;
    if (n == "sadesign") return DesignKind::SADesign;
    if (n == "madesign") return DesignKind::MADesign;
    if (n == "sidesign") return DesignKind::SiDesign;
    return std::nullopt;
}

std::string to_string(const DesignId& id) {
    std::string s{to_string(id.design)};
    s += "/";
    s += id.material.empty() ? "?" : id.material;
    s += "/";
    s += id.process.empty() ? "?" : id.process;
    return s;
}

std::uint64_t design_hash(const DesignId& id) {
    // FNV-1a over "kind|material|process". Stable across platforms and runs.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= static_cast<unsigned char>('|');
        h *= 1099511628211ull;
    };
    mix(to_string(id.design));
    mix(id.material);
    mix(id.process);
    return h;
}

std::optional<std::size_t> ParticipationMatrix::find_row(const DesignId& id) const {
    for (std::size_t i = 0; i < designs.size(); ++i)
        if (designs[i] == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> ParticipationMatrix::find_row(DesignKind kind) const {
    for (std::size_t i = 0; i < designs.size(); ++i)
        if (designs[i].design == kind) return i;
    return std::nullopt;
}

std::vector<Violation> validate_matrix(const ParticipationMatrix& m) {
    std::vector<Violation> out;
    if (m.designs.size() != m.values.size()) {
        out.push_back({"row/value count mismatch", ""});
        return out;
    }
    if (m.row_count() == 0) {
        out.push_back({"empty matrix", ""});
        return out;
    }
    for (std::size_t i = 0; i < m.row_count(); ++i) {
        const std::string row_name = to_string(m.designs[i]);
        double sum = 0.0;
        for (Region r : kRegions) {
            const double v = m.at(i, r);
            if (!std::isfinite(v)) {
                out.push_back({"non-finite entry", row_name + ", column " + std::string(to_string(r))});
                continue;
            }
            if (v < 0.0)
                out.push_back({"negative entry", row_name + ", column " + std::string(to_string(r))});
            sum += v;
        }
        if (std::isfinite(sum) && sum > 1.0) out.push_back({"row sum exceeds 1", row_name});
        for (std::size_t j = i + 1; j < m.row_count(); ++j)
            if (m.designs[i] == m.designs[j])
                out.push_back({"duplicate design", row_name});
    }
    return out;
}

std::string_view to_string(Units u) {
    return u == Units::Percent ? "percent" : "fraction";
}

std::optional<Units> units_from_string(std::string_view name) {
    const std::string n = normalize_token(name);
    if (n == "percent" || n == "pct" || n == "%") return Units::Percent;
    if (n == "fraction" || n == "frac") return Units::Fraction;
    return std::nullopt;
}

void ExtractionConfig::validate() const {
    if (n_samples == 0) throw ValidationError("n_samples must be >= 1");
    if (resolvability_rule.sigma_multiplier < 0.0)
        throw ValidationError("resolvability sigma multiplier must be >= 0");
    for (Region r : kRegions) {
        const double s = region_scale[region_index(r)];
        if (!(s > 0.0) || !std::isfinite(s))
            throw ValidationError("region_scale for " + std::string(to_string(r)) +
                                  " must be positive and finite");
    }
}

}  // namespace slx
