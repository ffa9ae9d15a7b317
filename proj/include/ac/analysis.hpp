#pragma once

#include "ac/evaluation.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ac {

// One row per (non-failed) sample: was the sample answered correctly, and was
// each factor fully correct on it. Treatment and covariates for the ATE
// estimators are drawn from the factor bits.
struct AnalysisRow {
    bool outcome = false;
    std::array<bool, 5> factor_correct{};
};

struct AnalysisTable {
    std::vector<AnalysisRow> rows;

    Json to_json() const;
    static AnalysisTable from_json(const Json& doc);
};

AnalysisTable table_from_records(const std::vector<RunRecord>& records);

struct AteEstimate {
    double ate = 0;
    double se = 0;
    double p_value = 1;
    std::size_t used_rows = 0;
    std::size_t dropped_strata = 0; // matching only: strata lacking overlap
    std::size_t dropped_rows = 0;
};

/// Closed-form least squares of outcome on [1, treatment, other factors];
/// classical standard error, two-sided normal-approximation p-value.
AteEstimate ate_ols(const AnalysisTable& table, Factor factor);

/// Exact stratification on the binary covariate vector (with saturated binary
/// covariates this coincides with propensity-score subclassification):
/// size-weighted within-stratum differences; one-armed strata are dropped.
AteEstimate ate_matching(const AnalysisTable& table, Factor factor);

/// Two-sided tail probability of the standard normal at |z|.
double normal_two_sided_p(double z);

// Seeded synthetic table with a planted treatment effect on the Sufficient
// factor bit; covariates influence both treatment uptake and the outcome so
// unadjusted differences are biased.
AnalysisTable make_planted_table(std::size_t rows, double effect, std::uint64_t seed);

} // namespace ac
