#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "slx/errors.hpp"
#include "slx/ingest.hpp"
#include "slx/predict.hpp"
#include "slx/qtls.hpp"
#include "slx/running_stats.hpp"
#include "slx/sle.hpp"
#include "slx/synth.hpp"

using namespace slx;
using doctest::Approx;

namespace {

ParticipationMatrix single_region_matrix(double p_si = 1.0) {
    ParticipationMatrix m;
    m.designs.push_back(DesignId{DesignKind::SiDesign, "X", "none"});
    m.values.push_back(RegionArray{0.0, 0.0, 0.0, p_si});
    return m;
}

}  // namespace

TEST_CASE("noiseless generation with infinite Q_HP reproduces Q_TLS exactly") {
    SynthSpec spec;
    spec.matrix = reference_matrix(ReferenceSet::TiN);
    spec.true_tangents = reference_tangents(ReferenceSet::TiN).tangents;
    spec.n_per_design = 4;
    const auto records = generate(spec);
    REQUIRE(records.size() == 16);
    for (const auto& rec : records) {
        const auto row = spec.matrix.find_row(rec.design);
        REQUIRE(row.has_value());
        const double q_true = 1.0 / forward_loss(spec.matrix.row(*row), spec.true_tangents);
        CHECK(rec.q_lp == q_true);
        CHECK(std::isinf(rec.q_hp));
        CHECK(q_tls(rec.q_lp, rec.q_hp) == q_true);
    }
}

TEST_CASE("noiseless generation against a fixed Q_HP inverts the saturation relation") {
    SynthSpec spec;
    spec.matrix = single_region_matrix();
    spec.true_tangents = RegionArray{0.0, 0.0, 0.0, 1e-6};  // Q_TLS = 1e6
    spec.n_per_design = 1;
    spec.q_hp = 5e6;
    const auto records = generate(spec);
    REQUIRE(records.size() == 1);
    // Algebraic inversion checked by hand: 1/(1e-6 + 2e-7) = 8.3333e5.
    CHECK(records[0].q_lp == Approx(1.0 / (1e-6 + 2e-7)).epsilon(1e-12));
    CHECK(records[0].q_hp == 5e6);
    // The pair round-trips through the Q_TLS relation.
    CHECK(q_tls(records[0].q_lp, records[0].q_hp) == Approx(1e6).epsilon(1e-12));
}

TEST_CASE("generation is deterministic per seed and varies across seeds") {
    SynthSpec spec;
    spec.matrix = reference_matrix(ReferenceSet::Al);
    spec.true_tangents = reference_tangents(ReferenceSet::Al).tangents;
    spec.n_per_design = 10;
    spec.relative_noise = 0.07;
    spec.rng_seed = 12345;
    const auto a = generate(spec);
    const auto b = generate(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    spec.rng_seed = 54321;
    const auto c = generate(spec);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].q_lp != c[i].q_lp) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("noise is keyed by design, not row position") {
    SynthSpec spec;
    spec.matrix = reference_matrix(ReferenceSet::TiN);
    spec.true_tangents = reference_tangents(ReferenceSet::TiN).tangents;
    spec.n_per_design = 5;
    spec.relative_noise = 0.05;
    spec.rng_seed = 8;
    auto base = generate(spec);

    SynthSpec reversed = spec;
    std::reverse(reversed.matrix.designs.begin(), reversed.matrix.designs.end());
    std::reverse(reversed.matrix.values.begin(), reversed.matrix.values.end());
    auto out = generate(reversed);

    auto key = [](const ResonatorMeasurement& m) {
        return to_string(m.design) + "/" + m.resonator_id;
    };
    std::map<std::string, double> base_q;
    for (const auto& m : base) base_q[key(m)] = m.q_lp;
    for (const auto& m : out) CHECK(base_q.at(key(m)) == m.q_lp);
}

TEST_CASE("lognormal noise has the requested relative dispersion and no mean bias") {
    SynthSpec spec;
    spec.matrix = single_region_matrix();
    spec.true_tangents = RegionArray{0.0, 0.0, 0.0, 5e-7};  // Q_TLS = 2e6
    spec.n_per_design = 20000;
    spec.relative_noise = 0.05;
    spec.rng_seed = 77;
    const auto records = generate(spec);
    RunningStats acc;
    for (const auto& r : records) acc.add(r.q_lp);
    const double q_true = 2e6;
    // Mean-preserving: sample mean within 4 standard errors of the truth.
    CHECK(std::abs(acc.mean() - q_true) <= 4.0 * acc.std_err());
    // Relative dispersion close to the requested 5%.
    CHECK(acc.sample_std() / acc.mean() == Approx(0.05).epsilon(0.05));
    for (const auto& r : records) CHECK(r.q_lp > 0.0);
}

TEST_CASE("standard error shrinks like one over root n") {
    SynthSpec spec;
    spec.matrix = single_region_matrix();
    spec.true_tangents = RegionArray{0.0, 0.0, 0.0, 1e-6};
    spec.relative_noise = 0.05;
    spec.rng_seed = 31;

    spec.n_per_design = 100;
    const auto small_stats = ensemble_stats_all(generate(spec));
    spec.n_per_design = 10000;
    const auto large_stats = ensemble_stats_all(generate(spec));
    REQUIRE(small_stats.size() == 1);
    REQUIRE(large_stats.size() == 1);
    const double ratio = small_stats[0].std_err_q_tls / large_stats[0].std_err_q_tls;
    CHECK(ratio == Approx(10.0).epsilon(0.3));  // sqrt(10000/100), within fluctuation
}

TEST_CASE("zero forward loss cannot be generated") {
    SynthSpec spec;
    spec.matrix = single_region_matrix();
    spec.true_tangents = RegionArray{};  // all zero
    CHECK_THROWS_AS(generate(spec), DomainError);
    spec.q_hp = 5e6;
    CHECK_THROWS_AS(generate(spec), DomainError);
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.matrix = single_region_matrix();
    spec.true_tangents = RegionArray{0, 0, 0, 1e-6};
    CHECK_NOTHROW(spec.validate());
    SUBCASE("zero resonators") {
        spec.n_per_design = 0;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
    SUBCASE("noise at or above one") {
        spec.relative_noise = 1.0;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
    SUBCASE("negative noise") {
        spec.relative_noise = -0.1;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
    SUBCASE("non-positive fixed q_hp") {
        spec.q_hp = 0.0;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
    SUBCASE("negative tangent") {
        spec.true_tangents[0] = -1e-9;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
    SUBCASE("invalid matrix") {
        spec.matrix.values[0][0] = -1.0;
        CHECK_THROWS_AS(generate(spec), ValidationError);
    }
}

TEST_CASE("end-to-end round trip at 5% noise recovers the tangents within two sigma") {
    SynthSpec spec;
    spec.matrix = reference_matrix(ReferenceSet::TiN);
    spec.true_tangents = reference_tangents(ReferenceSet::TiN).tangents;
    spec.n_per_design = 30;
    spec.relative_noise = 0.05;
    spec.rng_seed = 4;
    const auto records = generate(spec);
    const auto stats = ensemble_stats_all(records);
    ExtractionConfig cfg;
    cfg.n_samples = 10000;
    cfg.rng_seed = 4;
    const ExtractionResult res = extract(spec.matrix, stats, cfg);
    for (std::size_t r = 0; r < kRegionCount; ++r)
        CHECK(std::abs(res.estimates[r].mean - spec.true_tangents[r]) <=
              2.0 * res.estimates[r].std);
}
