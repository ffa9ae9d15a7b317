#include "ac/evaluation.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ac {

const char* factor_key(Factor f) noexcept {
    switch (f) {
        case Factor::Sufficient:       return "sufficient";
        case Factor::Necessary:        return "necessary";
        case Factor::HalpernPearl:     return "halpern_pearl";
        case Factor::NormViolated:     return "norm_violated";
        case Factor::BehaviorIntended: return "behavior_intended";
    }
    return "?";
}

bool factor_value(const FactorVector& v, Factor f) noexcept {
    switch (f) {
        case Factor::Sufficient:       return v.sufficient;
        case Factor::Necessary:        return v.necessary;
        case Factor::HalpernPearl:     return v.halpern_pearl;
        case Factor::NormViolated:     return v.norm_violated;
        case Factor::BehaviorIntended: return v.behavior_intended;
    }
    return false;
}

void set_factor(FactorVector& v, Factor f, bool value) noexcept {
    switch (f) {
        case Factor::Sufficient:       v.sufficient = value; break;
        case Factor::Necessary:        v.necessary = value; break;
        case Factor::HalpernPearl:     v.halpern_pearl = value; break;
        case Factor::NormViolated:     v.norm_violated = value; break;
        case Factor::BehaviorIntended: v.behavior_intended = value; break;
    }
}

namespace {

std::set<std::string> name_tokens(std::string_view name) {
    std::set<std::string> tokens;
    std::string current;
    for (char c : name) {
        const auto uc = static_cast<unsigned char>(c);
        // ASCII alphanumerics and any multi-byte UTF-8 unit count as word
        // characters; ASCII punctuation and whitespace separate tokens.
        if (std::isalnum(uc) || uc >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!current.empty()) {
            tokens.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(current);
    return tokens;
}

} // namespace

double token_set_jaccard(std::string_view a, std::string_view b) {
    std::set<std::string> ta = name_tokens(a);
    std::set<std::string> tb = name_tokens(b);
    if (ta.empty() && tb.empty()) return 1.0;
    std::size_t intersection = 0;
    for (const auto& t : ta) {
        if (tb.count(t)) ++intersection;
    }
    std::size_t unions = ta.size() + tb.size() - intersection;
    return unions == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(unions);
}

EventMatch event_match(const CausalSetting& predicted, const CausalSetting& gold,
                       const EventMatchConfig& config) {
    EventMatch out;
    const auto& gold_events = gold.events();
    const auto& pred_events = predicted.events();

    struct Cell {
        double similarity;
        std::size_t gold_index;
        std::size_t pred_index;
    };
    std::vector<Cell> cells;
    for (std::size_t g = 0; g < gold_events.size(); ++g) {
        for (std::size_t p = 0; p < pred_events.size(); ++p) {
            double sim = gold_events[g].first == pred_events[p].first
                             ? 1.0
                             : token_set_jaccard(pred_events[p].first.str(),
                                                 gold_events[g].first.str());
            if (sim >= config.jaccard_threshold) {
                cells.push_back({sim, g, p});
            }
        }
    }
    // Highest similarity first; ties favor earlier gold, then earlier
    // predicted, for a reproducible matching.
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.gold_index != b.gold_index) return a.gold_index < b.gold_index;
        return a.pred_index < b.pred_index;
    });

    std::vector<bool> gold_used(gold_events.size(), false);
    std::vector<bool> pred_used(pred_events.size(), false);
    std::vector<std::optional<MatchedPair>> by_gold(gold_events.size());
    for (const Cell& cell : cells) {
        if (gold_used[cell.gold_index] || pred_used[cell.pred_index]) continue;
        gold_used[cell.gold_index] = true;
        pred_used[cell.pred_index] = true;
        MatchedPair pair;
        pair.gold = gold_events[cell.gold_index].first;
        pair.predicted = pred_events[cell.pred_index].first;
        pair.similarity = cell.similarity;
        const FactorVector& pv = pred_events[cell.pred_index].second;
        const FactorVector& gv = gold_events[cell.gold_index].second;
        for (Factor f : kAllFactors) {
            pair.factor_correct[static_cast<std::size_t>(f)] =
                factor_value(pv, f) == factor_value(gv, f);
        }
        by_gold[cell.gold_index] = std::move(pair);
    }
    std::size_t matched = 0;
    for (auto& pair : by_gold) {
        if (pair) {
            ++matched;
            out.pairs.push_back(std::move(*pair));
        }
    }
    out.ce_score = gold_events.empty()
                       ? 0.0
                       : static_cast<double>(matched) / static_cast<double>(gold_events.size());
    if (predicted.has_outcome() && gold.has_outcome()) {
        double sim = predicted.outcome_name() == gold.outcome_name()
                         ? 1.0
                         : token_set_jaccard(predicted.outcome_name().str(),
                                             gold.outcome_name().str());
        out.oe_score = sim >= config.jaccard_threshold ? 1.0 : 0.0;
    }
    return out;
}

namespace {

RunRecord evaluate_sample(const Dataset& dataset, std::size_t index, const RunConfig& config,
                          const Annotator& annotator) {
    const Sample& sample = dataset.samples[index];
    RunRecord record;
    record.sample_index = index;
    record.gold = sample.answers;
    try {
        AnnotationResult annotation = annotator.annotate(sample, sample.queries.front());
        if (annotation.failed) {
            record.failed = true;
            record.failure = annotation.failure;
            record.predicted_setting = std::move(annotation.setting);
            return record;
        }
        record.predicted_setting = std::move(annotation.setting);
        ResolverPolicy policy = config.policy;
        policy.story = sample.story;
        Judgment judged = judge_query(*record.predicted_setting, policy);
        record.predicted.assign(sample.queries.size(), judged.answer);
        record.match = event_match(*record.predicted_setting, sample.reasoning, config.matching);
    } catch (const std::exception& e) {
        record.failed = true;
        record.failure = e.what();
    }
    return record;
}

} // namespace

std::vector<RunRecord> run_dataset(const Dataset& dataset, const RunConfig& config,
                                   const Annotator& annotator) {
    std::vector<RunRecord> records(dataset.samples.size());
    const int degree = std::max(1, config.parallelism);
    if (degree == 1) {
        // Serial reference path; the parallel path must match it bit for bit.
        for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
            records[i] = evaluate_sample(dataset, i, config, annotator);
        }
        return records;
    }
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) num_threads(degree)
    for (long long i = 0; i < static_cast<long long>(dataset.samples.size()); ++i) {
        records[static_cast<std::size_t>(i)] =
            evaluate_sample(dataset, static_cast<std::size_t>(i), config, annotator);
    }
#else
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        records[i] = evaluate_sample(dataset, i, config, annotator);
    }
#endif
    return records;
}

std::vector<RunRecord> run_dataset(const Dataset& dataset, const RunConfig& config) {
    std::unique_ptr<Annotator> annotator = make_annotator(config.annotator);
    return run_dataset(dataset, config, *annotator);
}

MetricsSummary metrics(const std::vector<RunRecord>& records) {
    if (records.empty()) {
        fail(Errc::EmptyInput, "metrics need at least one record");
    }
    MetricsSummary summary;
    summary.record_count = records.size();
    double ce_sum = 0, oe_sum = 0;
    std::array<std::size_t, 5> correct_bits{};
    for (const RunRecord& r : records) {
        for (std::size_t q = 0; q < r.gold.size(); ++q) {
            ++summary.total_answers;
            if (!r.failed && q < r.predicted.size() && r.predicted[q] == r.gold[q]) {
                ++summary.correct_answers;
            }
        }
        ce_sum += r.match.ce_score;
        oe_sum += r.match.oe_score;
        for (const MatchedPair& pair : r.match.pairs) {
            for (Factor f : kAllFactors) {
                auto i = static_cast<std::size_t>(f);
                ++summary.factor_bits[i];
                if (pair.factor_correct[i]) ++correct_bits[i];
            }
        }
    }
    summary.accuracy = summary.total_answers == 0
                           ? 0.0
                           : static_cast<double>(summary.correct_answers) /
                                 static_cast<double>(summary.total_answers);
    summary.ce = ce_sum / static_cast<double>(records.size());
    summary.oe = oe_sum / static_cast<double>(records.size());
    for (Factor f : kAllFactors) {
        auto i = static_cast<std::size_t>(f);
        summary.factor_accuracy[i] = summary.factor_bits[i] == 0
                                         ? 0.0
                                         : static_cast<double>(correct_bits[i]) /
                                               static_cast<double>(summary.factor_bits[i]);
    }
    return summary;
}

Json MetricsSummary::to_json() const {
    Json doc;
    doc["records"] = record_count;
    doc["total_answers"] = total_answers;
    doc["correct_answers"] = correct_answers;
    doc["accuracy"] = accuracy;
    doc["ce"] = ce;
    doc["oe"] = oe;
    Json factors = Json::object();
    for (Factor f : kAllFactors) {
        auto i = static_cast<std::size_t>(f);
        Json one;
        one["accuracy"] = factor_accuracy[i];
        one["bits"] = factor_bits[i];
        factors[factor_key(f)] = std::move(one);
    }
    doc["factors"] = std::move(factors);
    return doc;
}

std::string MetricsSummary::to_text() const {
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%7.2f%%", v * 100.0);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "Accuracy   CE         OE         sufficient  necessary   halpern_pearl  "
           "norm_violated  behavior_intended\n";
    out << pct(accuracy) << "  " << pct(ce) << "  " << pct(oe);
    for (Factor f : kAllFactors) {
        out << "  " << pct(factor_accuracy[static_cast<std::size_t>(f)]);
    }
    out << "\n";
    return out.str();
}

std::map<Factor, double> factor_flip_analysis(const std::vector<RunRecord>& records,
                                              const Dataset& dataset, const RunConfig& config) {
    const MetricsSummary baseline = metrics(records);
    std::map<Factor, double> deltas;
    for (Factor factor : kAllFactors) {
        std::size_t total = 0, correct = 0;
        for (const RunRecord& r : records) {
            const Sample& sample = dataset.samples[r.sample_index];
            if (r.failed || !r.predicted_setting) {
                total += r.gold.size();
                continue;
            }
            CausalSetting corrected = *r.predicted_setting;
            for (const MatchedPair& pair : r.match.pairs) {
                const FactorVector* gv = sample.reasoning.find(pair.gold);
                FactorVector* pv = corrected.find_mutable(pair.predicted);
                if (!gv || !pv) continue;
                set_factor(*pv, factor, factor_value(*gv, factor));
            }
            // Substitution can break the necessary=>halpern_pearl invariant
            // when only one of the pair is corrected; re-impose it the same
            // way the noisy backend does.
            for (auto& [name, f] : corrected.events_mutable()) {
                (void)name;
                if (f.necessary && !f.halpern_pearl) f.halpern_pearl = true;
            }
            ResolverPolicy policy = config.policy;
            policy.story = sample.story;
            YesNo answer;
            try {
                answer = judge_query(corrected, policy).answer;
            } catch (const Error&) {
                total += r.gold.size();
                continue;
            }
            for (std::size_t q = 0; q < r.gold.size(); ++q) {
                ++total;
                if (answer == r.gold[q]) ++correct;
            }
        }
        double corrected_accuracy =
            total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
        deltas[factor] = corrected_accuracy - baseline.accuracy;
    }
    return deltas;
}

} // namespace ac
