#include "ac/analysis.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace ac {

Json AnalysisTable::to_json() const {
    Json list = Json::array();
    for (const AnalysisRow& row : rows) {
        Json one;
        one["outcome"] = row.outcome ? 1 : 0;
        Json factors = Json::object();
        for (Factor f : kAllFactors) {
            factors[factor_key(f)] = row.factor_correct[static_cast<std::size_t>(f)] ? 1 : 0;
        }
        one["factors"] = std::move(factors);
        list.push_back(std::move(one));
    }
    Json doc;
    doc["rows"] = std::move(list);
    return doc;
}

AnalysisTable AnalysisTable::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("rows") || !doc.at("rows").is_array()) {
        fail(Errc::MalformedDocument, "analysis table needs a 'rows' list");
    }
    AnalysisTable table;
    for (const Json& one : doc.at("rows")) {
        AnalysisRow row;
        row.outcome = one.at("outcome").get<int>() != 0;
        const Json& factors = one.at("factors");
        for (Factor f : kAllFactors) {
            row.factor_correct[static_cast<std::size_t>(f)] =
                factors.at(factor_key(f)).get<int>() != 0;
        }
        table.rows.push_back(row);
    }
    return table;
}

AnalysisTable table_from_records(const std::vector<RunRecord>& records) {
    AnalysisTable table;
    for (const RunRecord& r : records) {
        if (r.failed) continue;
        AnalysisRow row;
        row.outcome = !r.gold.empty();
        for (std::size_t q = 0; q < r.gold.size(); ++q) {
            if (q >= r.predicted.size() || r.predicted[q] != r.gold[q]) {
                row.outcome = false;
                break;
            }
        }
        for (Factor f : kAllFactors) {
            auto i = static_cast<std::size_t>(f);
            bool all_correct = true;
            for (const MatchedPair& pair : r.match.pairs) {
                if (!pair.factor_correct[i]) {
                    all_correct = false;
                    break;
                }
            }
            row.factor_correct[i] = all_correct;
        }
        table.rows.push_back(row);
    }
    return table;
}

double normal_two_sided_p(double z) {
    if (!std::isfinite(z)) return 0.0;
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

namespace {

std::vector<Factor> covariates_of(Factor factor) {
    std::vector<Factor> out;
    for (Factor f : kAllFactors) {
        if (f != factor) out.push_back(f);
    }
    return out;
}

double finish_p(double ate, double se) {
    if (se > 0) return normal_two_sided_p(ate / se);
    return std::fabs(ate) < 1e-12 ? 1.0 : 0.0;
}

} // namespace

AteEstimate ate_ols(const AnalysisTable& table, Factor factor) {
    const std::size_t n = table.rows.size();
    if (n < 2) {
        fail(Errc::TooFewRows, "least squares needs at least two rows");
    }
    const std::vector<Factor> covariates = covariates_of(factor);
    const std::size_t p = 2 + covariates.size();
    if (n <= p) {
        fail(Errc::TooFewRows, "fewer rows than coefficients plus one");
    }

    auto design_row = [&](const AnalysisRow& row) {
        std::vector<double> x(p);
        x[0] = 1.0;
        x[1] = row.factor_correct[static_cast<std::size_t>(factor)] ? 1.0 : 0.0;
        for (std::size_t c = 0; c < covariates.size(); ++c) {
            x[2 + c] = row.factor_correct[static_cast<std::size_t>(covariates[c])] ? 1.0 : 0.0;
        }
        return x;
    };

    // Normal equations: xtx beta = xty, then invert xtx for the covariance.
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (const AnalysisRow& row : table.rows) {
        std::vector<double> x = design_row(row);
        double y = row.outcome ? 1.0 : 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += x[i] * y;
            for (std::size_t j = 0; j < p; ++j) xtx[i][j] += x[i] * x[j];
        }
    }

    // Gauss-Jordan on [xtx | I] with partial pivoting.
    std::vector<std::vector<double>> aug(p, std::vector<double>(2 * p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) aug[i][j] = xtx[i][j];
        aug[i][p + i] = 1.0;
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) pivot = r;
        }
        if (std::fabs(aug[pivot][col]) < 1e-10) {
            fail(Errc::RankDeficientDesign, "design matrix is rank deficient");
        }
        std::swap(aug[col], aug[pivot]);
        const double inv_pivot = 1.0 / aug[col][col];
        for (std::size_t j = 0; j < 2 * p; ++j) aug[col][j] *= inv_pivot;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double factor_r = aug[r][col];
            if (factor_r == 0.0) continue;
            for (std::size_t j = 0; j < 2 * p; ++j) aug[r][j] -= factor_r * aug[col][j];
        }
    }
    std::vector<std::vector<double>> inv(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) inv[i][j] = aug[i][p + j];
    }

    std::vector<double> beta(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) beta[i] += inv[i][j] * xty[j];
    }

    double rss = 0.0;
    for (const AnalysisRow& row : table.rows) {
        std::vector<double> x = design_row(row);
        double fitted = 0.0;
        for (std::size_t j = 0; j < p; ++j) fitted += x[j] * beta[j];
        const double resid = (row.outcome ? 1.0 : 0.0) - fitted;
        rss += resid * resid;
    }
    if (rss < 1e-16) rss = 0.0; // numerically perfect fit
    const double sigma2 = rss / static_cast<double>(n - p);

    AteEstimate estimate;
    estimate.used_rows = n;
    estimate.ate = beta[1];
    estimate.se = std::sqrt(std::max(0.0, sigma2 * inv[1][1]));
    estimate.p_value = finish_p(estimate.ate, estimate.se);
    return estimate;
}

AteEstimate ate_matching(const AnalysisTable& table, Factor factor) {
    if (table.rows.empty()) {
        fail(Errc::TooFewRows, "matching needs at least one row");
    }
    const std::vector<Factor> covariates = covariates_of(factor);

    struct Stratum {
        std::size_t treated = 0, control = 0;
        double treated_sum = 0, control_sum = 0;
        std::vector<double> treated_y, control_y;
    };
    std::map<unsigned, Stratum> strata;
    for (const AnalysisRow& row : table.rows) {
        unsigned code = 0;
        for (std::size_t c = 0; c < covariates.size(); ++c) {
            if (row.factor_correct[static_cast<std::size_t>(covariates[c])]) code |= 1u << c;
        }
        Stratum& s = strata[code];
        const double y = row.outcome ? 1.0 : 0.0;
        if (row.factor_correct[static_cast<std::size_t>(factor)]) {
            ++s.treated;
            s.treated_sum += y;
            s.treated_y.push_back(y);
        } else {
            ++s.control;
            s.control_sum += y;
            s.control_y.push_back(y);
        }
    }

    auto sample_variance = [](const std::vector<double>& ys) {
        const std::size_t m = ys.size();
        if (m < 2) return 0.0;
        double mean = 0.0;
        for (double y : ys) mean += y;
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (double y : ys) ss += (y - mean) * (y - mean);
        return ss / static_cast<double>(m - 1);
    };

    double weight_total = 0.0, weighted_diff = 0.0, weighted_var = 0.0;
    AteEstimate estimate;
    for (const auto& [code, s] : strata) {
        (void)code;
        if (s.treated == 0 || s.control == 0) {
            ++estimate.dropped_strata;
            estimate.dropped_rows += s.treated + s.control;
            continue;
        }
        const double w = static_cast<double>(s.treated + s.control);
        const double diff = s.treated_sum / static_cast<double>(s.treated) -
                            s.control_sum / static_cast<double>(s.control);
        const double var = sample_variance(s.treated_y) / static_cast<double>(s.treated) +
                           sample_variance(s.control_y) / static_cast<double>(s.control);
        weight_total += w;
        weighted_diff += w * diff;
        weighted_var += w * w * var;
        estimate.used_rows += s.treated + s.control;
    }
    if (weight_total == 0.0) {
        fail(Errc::NoOverlap, "every stratum lacks one of the arms");
    }
    estimate.ate = weighted_diff / weight_total;
    estimate.se = std::sqrt(weighted_var) / weight_total;
    estimate.p_value = finish_p(estimate.ate, estimate.se);
    return estimate;
}

AnalysisTable make_planted_table(std::size_t rows, double effect, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AnalysisTable table;
    table.rows.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        AnalysisRow row;
        const bool c1 = unit(rng) < 0.5;
        const bool c2 = unit(rng) < 0.5;
        const bool c3 = unit(rng) < 0.5;
        const bool c4 = unit(rng) < 0.5;
        // Treatment uptake depends on the first two covariates, so the naive
        // treated-minus-control difference is confounded.
        const double p_treat = 0.3 + (c1 ? 0.2 : 0.0) + (c2 ? 0.1 : 0.0);
        const bool treated = unit(rng) < p_treat;
        const double p_outcome =
            0.15 + (treated ? effect : 0.0) + (c1 ? 0.1 : 0.0) + (c2 ? 0.1 : 0.0);
        row.outcome = unit(rng) < p_outcome;
        row.factor_correct[static_cast<std::size_t>(Factor::Sufficient)] = treated;
        row.factor_correct[static_cast<std::size_t>(Factor::Necessary)] = c1;
        row.factor_correct[static_cast<std::size_t>(Factor::HalpernPearl)] = c2;
        row.factor_correct[static_cast<std::size_t>(Factor::NormViolated)] = c3;
        row.factor_correct[static_cast<std::size_t>(Factor::BehaviorIntended)] = c4;
        table.rows.push_back(row);
    }
    return table;
}

} // namespace ac
