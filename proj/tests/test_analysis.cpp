#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ac/analysis.hpp"
#include "ac/error.hpp"

#include <cmath>
#include <random>

using namespace ac;

namespace {

AnalysisRow row(bool outcome, bool treated, bool c1 = false, bool c2 = false, bool c3 = false,
                bool c4 = false) {
    AnalysisRow r;
    r.outcome = outcome;
    r.factor_correct = {treated, c1, c2, c3, c4};
    return r;
}

constexpr Factor kTreatment = Factor::Sufficient;

} // namespace

TEST_CASE("constant outcomes estimate a zero effect") {
    AnalysisTable table;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        table.rows.push_back(row(true, rng() & 1, rng() & 1, rng() & 1, rng() & 1, rng() & 1));
    }
    AteEstimate ols = ate_ols(table, kTreatment);
    CHECK(ols.ate == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ols.p_value == doctest::Approx(1.0));
    AteEstimate matching = ate_matching(table, kTreatment);
    CHECK(matching.ate == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a noiseless planted effect of one is recovered exactly") {
    AnalysisTable table;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 400; ++i) {
        bool treated = rng() & 1;
        table.rows.push_back(row(treated, treated, rng() & 1, rng() & 1, rng() & 1, rng() & 1));
    }
    AteEstimate ols = ate_ols(table, kTreatment);
    CHECK(ols.ate == doctest::Approx(1.0).epsilon(1e-9));
    AteEstimate matching = ate_matching(table, kTreatment);
    CHECK(matching.ate == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-stratum matching is plain difference-in-means arithmetic") {
    AnalysisTable table;
    for (int i = 0; i < 10; ++i) table.rows.push_back(row(i < 8, true));   // treated mean 0.8
    for (int i = 0; i < 10; ++i) table.rows.push_back(row(i < 5, false));  // control mean 0.5
    AteEstimate est = ate_matching(table, kTreatment);
    CHECK(est.ate == doctest::Approx(0.3));
    CHECK(est.used_rows == 20);
    CHECK(est.dropped_strata == 0);
}

TEST_CASE("strata lacking an arm are dropped; losing all of them is an error") {
    AnalysisTable mixed;
    for (int i = 0; i < 6; ++i) mixed.rows.push_back(row(i % 2 == 0, true, true));   // stratum c1
    for (int i = 0; i < 6; ++i) mixed.rows.push_back(row(i % 3 == 0, false, true));
    for (int i = 0; i < 4; ++i) mixed.rows.push_back(row(true, true, false));        // one-armed
    AteEstimate est = ate_matching(mixed, kTreatment);
    CHECK(est.dropped_strata == 1);
    CHECK(est.dropped_rows == 4);
    CHECK(est.used_rows == 12);

    AnalysisTable hopeless;
    for (int i = 0; i < 5; ++i) hopeless.rows.push_back(row(true, true, true));
    for (int i = 0; i < 5; ++i) hopeless.rows.push_back(row(false, false, false));
    CHECK_THROWS_AS(ate_matching(hopeless, kTreatment), Error);
}

TEST_CASE("degenerate designs are rejected with the dedicated errors") {
    AnalysisTable too_small;
    too_small.rows.push_back(row(true, true));
    CHECK_THROWS_AS(ate_ols(too_small, kTreatment), Error);

    // Constant treatment column is collinear with the intercept.
    AnalysisTable constant;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        constant.rows.push_back(row(rng() & 1, true, rng() & 1, rng() & 1, rng() & 1, rng() & 1));
    }
    try {
        ate_ols(constant, kTreatment);
        FAIL("expected rank-deficient-design");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::RankDeficientDesign);
    }
}

TEST_CASE("planted-effect table: both estimators recover the effect and agree") {
    AnalysisTable table = make_planted_table(2000, 0.3, 0);
    AteEstimate ols = ate_ols(table, kTreatment);
    AteEstimate matching = ate_matching(table, kTreatment);
    CHECK(std::fabs(ols.ate - 0.3) < 0.05);
    CHECK(std::fabs(matching.ate - 0.3) < 0.05);
    CHECK(std::fabs(ols.ate - matching.ate) < 0.05);
    CHECK(ols.p_value < 0.001);
    CHECK(matching.p_value < 0.001);
}

TEST_CASE("zero-effect calibration: the estimate stays within three standard errors") {
    int ols_ok = 0, matching_ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        AnalysisTable table = make_planted_table(2000, 0.0, seed);
        AteEstimate ols = ate_ols(table, kTreatment);
        if (std::fabs(ols.ate) < 3.0 * ols.se) ++ols_ok;
        AteEstimate matching = ate_matching(table, kTreatment);
        if (std::fabs(matching.ate) < 3.0 * matching.se) ++matching_ok;
    }
    CHECK(ols_ok >= 99);
    CHECK(matching_ok >= 99);
}

TEST_CASE("analysis tables round-trip through json") {
    AnalysisTable table = make_planted_table(50, 0.3, 9);
    AnalysisTable back = AnalysisTable::from_json(table.to_json());
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(back.rows[i].outcome == table.rows[i].outcome);
        CHECK(back.rows[i].factor_correct == table.rows[i].factor_correct);
    }
    CHECK_THROWS_AS(AnalysisTable::from_json(Json::parse("{}")), Error);
}

TEST_CASE("normal tail probabilities behave") {
    CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0));
    CHECK(normal_two_sided_p(1.96) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(normal_two_sided_p(-1.96) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(normal_two_sided_p(10.0) < 1e-20);
}
