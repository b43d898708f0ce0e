#include <array>
#include <cctype>
#include <string>

#include "slx/errors.hpp"
#include "slx/ingest.hpp"

namespace slx {

namespace {

// Participation percentages for the four accentuating designs (rows) and
// four regions (columns, canonical order), one table per device set.
struct ReferencePercent {
    const char* material;
    const char* process;
    std::array<RegionArray, 4> percent;  // indexed by DesignKind
};

constexpr ReferencePercent kTiN = {
    "TiN",
    "none",
    {{{0.274, 0.147, 0.017, 86.149},
      {0.063, 0.172, 0.058, 41.099},
      {0.014, 0.029, 0.084, 10.964},
      {0.042, 0.026, 0.006, 80.5158}}},
};

constexpr ReferencePercent kAl = {
    "Al",
    "none",
    {{{0.297, 0.156, 0.017, 87.839},
      {0.084, 0.193, 0.072, 46.128},
      {0.014, 0.041, 0.076, 15.490},
      {0.050, 0.033, 0.007, 79.543}}},
};

constexpr ReferencePercent kTiNHF = {
    "TiN",
    "HF",
    {{{0.271, 0.147, 0.018, 85.171},
      {0.096, 0.120, 0.052, 54.690},
      {0.020, 0.047, 0.092, 14.764},
      {0.041, 0.025, 0.005, 80.249}}},
};

// The Al wafers were shared between the treated and untreated sets, so the
// with-HF table repeats the Al percentages.
constexpr ReferencePercent kAlHF = {
    "Al",
    "HF",
    {{{0.297, 0.156, 0.017, 87.839},
      {0.084, 0.193, 0.072, 46.128},
      {0.014, 0.041, 0.076, 15.490},
      {0.050, 0.033, 0.007, 79.543}}},
};

ParticipationMatrix build(const ReferencePercent& src) {
    ParticipationMatrix m;
    for (DesignKind kind : kDesignKinds) {
        m.designs.push_back(DesignId{kind, src.material, src.process});
        RegionArray row{};
        for (std::size_t r = 0; r < kRegionCount; ++r)
            row[r] = src.percent[static_cast<std::size_t>(kind)][r] / 100.0;
        m.values.push_back(row);
    }
    return m;
}

// Published loss tangents (MS, SA, MA, Si). Regions reported only as an
// upper bound carry the bound value and are marked below.
constexpr RegionArray kTangentsTiN = {4.6e-4, 1.7e-3, 3.3e-3, 2.6e-7};
constexpr RegionArray kTangentsTiNHF = {2.7e-4, 1.2e-3, 3.5e-3, 2.8e-7};
constexpr RegionArray kTangentsAl = {3.2e-4, 2.9e-3, 29.4e-3, 2.6e-7};
constexpr RegionArray kTangentsAlHF = {1.3e-4, 3.5e-3, 32.7e-3, 1.3e-7};

constexpr std::array<bool, 4> kBoundsTiN = {false, false, false, false};
constexpr std::array<bool, 4> kBoundsTiNHF = {false, true, false, false};
constexpr std::array<bool, 4> kBoundsAl = {true, true, false, false};
constexpr std::array<bool, 4> kBoundsAlHF = {true, true, false, false};

}  // namespace

std::string_view to_string(ReferenceSet s) {
    switch (s) {
        case ReferenceSet::TiN: return "tin";
        case ReferenceSet::TiNHF: return "tin-hf";
        case ReferenceSet::Al: return "al";
        case ReferenceSet::AlHF: return "al-hf";
    }
    return "?";
}

std::optional<ReferenceSet> reference_set_from_string(std::string_view name) {
    std::string n;
    for (char c : name) {
        if (c == '_' || c == '-' || c == ' ') continue;
        n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (n == "tin") return ReferenceSet::TiN;
    if (n == "tinhf" || n == "tinwhf") return ReferenceSet::TiNHF;
    if (n == "al") return ReferenceSet::Al;
    if (n == "alhf" || n == "alwhf") return ReferenceSet::AlHF;
    return std::nullopt;
}

const ParticipationMatrix& reference_matrix(ReferenceSet s) {
    static const ParticipationMatrix tin = build(kTiN);
    static const ParticipationMatrix tin_hf = build(kTiNHF);
    static const ParticipationMatrix al = build(kAl);
    static const ParticipationMatrix al_hf = build(kAlHF);
    switch (s) {
        case ReferenceSet::TiN: return tin;
        case ReferenceSet::TiNHF: return tin_hf;
        case ReferenceSet::Al: return al;
        case ReferenceSet::AlHF: return al_hf;
    }
    throw DomainError("unknown reference set");
}

const ReferenceTangents& reference_tangents(ReferenceSet s) {
    static const ReferenceTangents tin{kTangentsTiN, kBoundsTiN};
    static const ReferenceTangents tin_hf{kTangentsTiNHF, kBoundsTiNHF};
    static const ReferenceTangents al{kTangentsAl, kBoundsAl};
    static const ReferenceTangents al_hf{kTangentsAlHF, kBoundsAlHF};
    switch (s) {
        case ReferenceSet::TiN: return tin;
        case ReferenceSet::TiNHF: return tin_hf;
        case ReferenceSet::Al: return al;
        case ReferenceSet::AlHF: return al_hf;
    }
    throw DomainError("unknown reference set");
}

}  // namespace slx
