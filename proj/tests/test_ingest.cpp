#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "slx/errors.hpp"
#include "slx/ingest.hpp"
#include "slx/rng.hpp"
#include "slx/version.hpp"

using namespace slx;
using doctest::Approx;

namespace {

namespace fs = std::filesystem;

fs::path tmp_dir() {
    const auto dir = fs::temp_directory_path() / "slx_ingest_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const char* name, const std::string& text) {
    const auto path = tmp_dir() / name;
    std::ofstream os(path);
    os << text;
    return path;
}

const char* kTableS1Csv =
    "design,material,process,MS,SA,MA,Si\n"
    "MS design,TiN,none,0.274,0.147,0.017,86.149\n"
    "SA design,TiN,none,0.063,0.172,0.058,41.099\n"
    "MA design,TiN,none,0.014,0.029,0.084,10.964\n"
    "Si design,TiN,none,0.042,0.026,0.006,80.5158\n";

ParticipationMatrix random_matrix(StreamRng& rng, std::size_t rows = 4) {
    ParticipationMatrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        m.designs.push_back(DesignId{kDesignKinds[i % 4], "M" + std::to_string(i / 4),
                                     i % 2 ? "HF" : "none"});
        RegionArray row{};
        for (std::size_t r = 0; r < kRegionCount; ++r) row[r] = 0.2 * rng.next_uniform();
        m.values.push_back(row);
    }
    return m;
}

}  // namespace

TEST_CASE("bundled matrices reproduce the published percentages") {
    // Printed in percent with the tables' decimal places, entry for entry.
    struct Row {
        DesignKind kind;
        const char* cells[4];
    };
    struct Table {
        ReferenceSet set;
        Row rows[4];
    };
    const Table tables[] = {
        {ReferenceSet::TiN,
         {{DesignKind::MSDesign, {"0.274", "0.147", "0.017", "86.149"}},
          {DesignKind::SADesign, {"0.063", "0.172", "0.058", "41.099"}},
          {DesignKind::MADesign, {"0.014", "0.029", "0.084", "10.964"}},
          {DesignKind::SiDesign, {"0.042", "0.026", "0.006", "80.5158"}}}},
        {ReferenceSet::Al,
         {{DesignKind::MSDesign, {"0.297", "0.156", "0.017", "87.839"}},
          {DesignKind::SADesign, {"0.084", "0.193", "0.072", "46.128"}},
          {DesignKind::MADesign, {"0.014", "0.041", "0.076", "15.490"}},
          {DesignKind::SiDesign, {"0.050", "0.033", "0.007", "79.543"}}}},
        {ReferenceSet::TiNHF,
         {{DesignKind::MSDesign, {"0.271", "0.147", "0.018", "85.171"}},
          {DesignKind::SADesign, {"0.096", "0.120", "0.052", "54.690"}},
          {DesignKind::MADesign, {"0.020", "0.047", "0.092", "14.764"}},
          {DesignKind::SiDesign, {"0.041", "0.025", "0.005", "80.249"}}}},
        {ReferenceSet::AlHF,
         {{DesignKind::MSDesign, {"0.297", "0.156", "0.017", "87.839"}},
          {DesignKind::SADesign, {"0.084", "0.193", "0.072", "46.128"}},
          {DesignKind::MADesign, {"0.014", "0.041", "0.076", "15.490"}},
          {DesignKind::SiDesign, {"0.050", "0.033", "0.007", "79.543"}}}},
    };
    for (const Table& table : tables) {
        const ParticipationMatrix& m = reference_matrix(table.set);
        REQUIRE(m.row_count() == 4);
        for (const Row& row : table.rows) {
            const auto idx = m.find_row(row.kind);
            REQUIRE(idx.has_value());
            for (std::size_t r = 0; r < kRegionCount; ++r) {
                const std::string expected = row.cells[r];
                const auto dot = expected.find('.');
                const int decimals = static_cast<int>(expected.size() - dot - 1);
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.*f", decimals,
                              m.at(*idx, kRegions[r]) * 100.0);
                CHECK(std::string(buf) == expected);
            }
        }
    }
}

TEST_CASE("reference tangents carry the published values and bound markers") {
    const ReferenceTangents& tin = reference_tangents(ReferenceSet::TiN);
    CHECK(tin.tangents[region_index(Region::MS)] == 4.6e-4);
    CHECK(tin.tangents[region_index(Region::MA)] == 3.3e-3);
    for (bool b : tin.is_upper_bound) CHECK_FALSE(b);

    const ReferenceTangents& al = reference_tangents(ReferenceSet::Al);
    CHECK(al.is_upper_bound[region_index(Region::MS)]);
    CHECK(al.is_upper_bound[region_index(Region::SA)]);
    CHECK_FALSE(al.is_upper_bound[region_index(Region::MA)]);
    CHECK(al.tangents[region_index(Region::MA)] == 29.4e-3);

    CHECK(reference_set_from_string("tin-hf") == ReferenceSet::TiNHF);
    CHECK(reference_set_from_string("AL_HF") == ReferenceSet::AlHF);
    CHECK_FALSE(reference_set_from_string("nb").has_value());
}

TEST_CASE("read_participation parses the supplement-table CSV") {
    const auto path = write_text("s1.csv", kTableS1Csv);
    const ParticipationMatrix m = read_participation(path, Units::Percent);
    REQUIRE(m.row_count() == 4);
    CHECK(m.at(*m.find_row(DesignKind::MSDesign), Region::Si) == Approx(0.86149).epsilon(1e-15));
    // Identical to the bundled table bit for bit: same literal, same conversion.
    const ParticipationMatrix& ref = reference_matrix(ReferenceSet::TiN);
    for (std::size_t i = 0; i < 4; ++i)
        for (Region r : kRegions) CHECK(m.at(i, r) == ref.at(i, r));
}

TEST_CASE("read_participation accepts an all-zero matrix") {
    const auto path = write_text("zeros.csv",
                                 "design,material,process,MS,SA,MA,Si\n"
                                 "MS design,X,none,0,0,0,0\n");
    const ParticipationMatrix m = read_participation(path, Units::Percent);
    for (Region r : kRegions) CHECK(m.at(0, r) == 0.0);
}

TEST_CASE("read_participation schema errors") {
    SUBCASE("unknown region column") {
        const auto path = write_text("xx.csv",
                                     "design,material,process,MS,SA,MA,Si,XX\n"
                                     "MS design,X,none,0,0,0,0,0\n");
        CHECK_THROWS_WITH_AS(read_participation(path, Units::Percent),
                             doctest::Contains("unknown column \"XX\""), ParseError);
    }
    SUBCASE("missing column") {
        const auto path = write_text("missing.csv",
                                     "design,material,process,MS,SA,MA\n"
                                     "MS design,X,none,0,0,0\n");
        CHECK_THROWS_WITH_AS(read_participation(path, Units::Percent),
                             doctest::Contains("missing column \"Si\""), ParseError);
    }
    SUBCASE("bad number reports the line") {
        const auto path = write_text("badnum.csv",
                                     "design,material,process,MS,SA,MA,Si\n"
                                     "MS design,X,none,0.1,zz,0,0\n");
        try {
            read_participation(path, Units::Percent);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("zz") != std::string::npos);
        }
    }
    SUBCASE("unknown design name") {
        const auto path = write_text("baddesign.csv",
                                     "design,material,process,MS,SA,MA,Si\n"
                                     "XY design,X,none,0,0,0,0\n");
        CHECK_THROWS_AS(read_participation(path, Units::Percent), ParseError);
    }
    SUBCASE("field count mismatch") {
        const auto path = write_text("short.csv",
                                     "design,material,process,MS,SA,MA,Si\n"
                                     "MS design,X,none,0,0,0\n");
        CHECK_THROWS_AS(read_participation(path, Units::Percent), ParseError);
    }
    SUBCASE("negative entry is a validation error") {
        const auto path = write_text("neg.csv",
                                     "design,material,process,MS,SA,MA,Si\n"
                                     "MS design,X,none,-0.1,0,0,0\n");
        CHECK_THROWS_WITH_AS(read_participation(path, Units::Percent),
                             doctest::Contains("negative entry"), ValidationError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_participation(tmp_dir() / "nope.csv", Units::Percent), IoError);
    }
}

TEST_CASE("fraction units skip the percent conversion") {
    const auto path = write_text("frac.csv",
                                 "design,material,process,MS,SA,MA,Si\n"
                                 "MS design,X,none,0.00274,0.00147,0.00017,0.86149\n");
    const ParticipationMatrix m = read_participation(path, Units::Fraction);
    CHECK(m.at(0, Region::MS) == 0.00274);
    CHECK(m.at(0, Region::Si) == 0.86149);
}

TEST_CASE("matrix write/read round-trips bit-exactly in fraction units") {
    StreamRng rng(99, 0, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const ParticipationMatrix m = random_matrix(rng, 4 + trial % 5);
        const auto path = tmp_dir() / "roundtrip.csv";
        write_participation(path, m, Units::Fraction);
        const ParticipationMatrix back = read_participation(path, Units::Fraction);
        REQUIRE(back.row_count() == m.row_count());
        for (std::size_t i = 0; i < m.row_count(); ++i) {
            CHECK(back.designs[i] == m.designs[i]);
            for (Region r : kRegions) CHECK(back.at(i, r) == m.at(i, r));
        }
    }
}

TEST_CASE("percent-mode round trip is faithful to one ulp") {
    StreamRng rng(7, 0, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const ParticipationMatrix m = random_matrix(rng);
        const auto path = tmp_dir() / "roundtrip_pct.csv";
        write_participation(path, m, Units::Percent);
        const ParticipationMatrix back = read_participation(path, Units::Percent);
        for (std::size_t i = 0; i < m.row_count(); ++i)
            for (Region r : kRegions) {
                const double a = m.at(i, r), b = back.at(i, r);
                CHECK(std::abs(a - b) <=
                      std::nextafter(a, std::numeric_limits<double>::infinity()) - a);
            }
    }
}

TEST_CASE("read_measurements separates accepted, flagged and rejected records") {
    const auto path = write_text("meas.csv",
                                 "design,material,process,resonator_id,q_lp,q_hp\n"
                                 "SA design,TiN,none,r07,8.0e5,2.0e6\n"
                                 "SA design,TiN,none,r08,0,2.0e6\n"
                                 "SA design,TiN,none,r09,2e6,1e6\n"
                                 "SA design,TiN,none,r10,1e6,1e6\n"
                                 "MS design,TiN,none,r11,8.6e5,inf\n");
    const MeasurementSet set = read_measurements(path);
    REQUIRE(set.accepted.size() == 2);
    CHECK(set.accepted[0].resonator_id == "r07");
    CHECK(set.accepted[0].q_lp == 8.0e5);
    CHECK(std::isinf(set.accepted[1].q_hp));

    REQUIRE(set.rejected.size() == 1);
    CHECK(set.rejected[0].reason == "non-positive Q");
    CHECK(set.rejected[0].line == 3);

    REQUIRE(set.flagged.size() == 2);
    CHECK(set.flagged[0].reason == "Q_HP < Q_LP");
    CHECK(set.flagged[0].record.resonator_id == "r09");
    CHECK(set.flagged[1].reason == "Q_HP = Q_LP");
    CHECK_FALSE(set.clean());
}

TEST_CASE("measurements round-trip including the infinity sentinel") {
    std::vector<ResonatorMeasurement> records = {
        {DesignId{DesignKind::MSDesign, "TiN", "none"}, "r000", 8.6e5,
         std::numeric_limits<double>::infinity()},
        {DesignId{DesignKind::SADesign, "TiN", "HF"}, "r001", 2.0999999999999998e6, 5.1e6},
    };
    const auto path = tmp_dir() / "meas_roundtrip.csv";
    write_measurements(path, records);
    const MeasurementSet back = read_measurements(path);
    REQUIRE(back.accepted.size() == 2);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(back.accepted[i] == records[i]);
}

TEST_CASE("dataset JSON envelope round trip") {
    Dataset ds;
    ds.matrix = reference_matrix(ReferenceSet::TiNHF);
    ds.metadata = {{"source", "wafer 7"}, {"note", "post-etch"}};
    ds.measurements.accepted = {
        {ds.matrix.designs[0], "r000", 8.6e5, 5e6},
        {ds.matrix.designs[1], "r001", 8.0e5, std::numeric_limits<double>::infinity()},
    };
    const auto path = tmp_dir() / "dataset.json";
    write_dataset_json(path, ds);
    const Dataset back = read_dataset_json(path);
    CHECK(back.metadata.at("source") == "wafer 7");
    REQUIRE(back.matrix.row_count() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (Region r : kRegions) CHECK(back.matrix.at(i, r) == ds.matrix.at(i, r));
    REQUIRE(back.measurements.accepted.size() == 2);
    CHECK(back.measurements.accepted[0] == ds.measurements.accepted[0]);
    CHECK(std::isinf(back.measurements.accepted[1].q_hp));
}

TEST_CASE("dataset validation rejects measurements without a matrix row") {
    Dataset ds;
    ds.matrix = reference_matrix(ReferenceSet::TiN);
    ds.measurements.accepted = {
        {DesignId{DesignKind::MSDesign, "Nb", "none"}, "r0", 8e5, 5e6}};
    CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
}

TEST_CASE("results file carries config, estimates and version") {
    std::vector<LossTangentEstimate> estimates;
    estimates.push_back({Region::MS, 4.6e-4, 2.4e-4, true, {}});
    estimates.push_back({Region::SA, 3.1e-4, 8.0e-4, false, 1.2e-3});
    estimates.push_back({Region::MA, 3.3e-3, 0.4e-3, true, {}});
    estimates.push_back({Region::Si, 2.6e-7, 0.4e-7, true, {}});
    ExtractionConfig cfg;
    cfg.rng_seed = 777;

    const auto path = tmp_dir() / "results.json";
    write_estimates(path, estimates, cfg);

    std::ifstream is(path);
    const auto j = nlohmann::json::parse(is);
    // Exactly the documented top-level keys.
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.insert(k);
    CHECK(keys == std::set<std::string>{"config", "estimates", "generated_by"});

    CHECK(j.at("config").at("rng_seed") == 777);
    CHECK(j.at("config").at("n_samples") == 10000);
    REQUIRE(j.at("estimates").size() == 4);
    const auto& ma = j.at("estimates").at(2);
    CHECK(ma.at("region") == "MA");
    CHECK(ma.at("mean").get<double>() == 3.3e-3);
    CHECK(ma.at("std").get<double>() == 0.4e-3);
    CHECK(ma.at("resolvable") == true);
    CHECK(ma.at("upper_bound").is_null());
    const auto& sa = j.at("estimates").at(1);
    CHECK(sa.at("resolvable") == false);
    CHECK(sa.at("upper_bound").get<double>() == 1.2e-3);
    CHECK(sa.at("mean").get<double>() == 3.1e-4);  // raw moments always present

    const ResultsFile back = read_estimates(path);
    REQUIRE(back.estimates.size() == 4);
    CHECK(back.estimates[1].upper_bound == 1.2e-3);
    CHECK(back.config.rng_seed == 777);
    CHECK(back.generated_by == std::string("slx ") + kVersion);

    SUBCASE("single estimate writes a single row") {
        const auto single = tmp_dir() / "single.json";
        write_estimates(single, std::vector<LossTangentEstimate>{estimates[0]}, cfg);
        std::ifstream sis(single);
        CHECK(nlohmann::json::parse(sis).at("estimates").size() == 1);
    }
    SUBCASE("empty estimate list is rejected") {
        CHECK_THROWS_AS(write_estimates(tmp_dir() / "none.json",
                                        std::vector<LossTangentEstimate>{}, cfg),
                        ValidationError);
    }
}
