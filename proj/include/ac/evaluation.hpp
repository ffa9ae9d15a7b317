#pragma once

#include "ac/annotate.hpp"
#include "ac/dataset.hpp"
#include "ac/judge.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ac {

enum class Factor {
    Sufficient = 0,
    Necessary = 1,
    HalpernPearl = 2,
    NormViolated = 3,
    BehaviorIntended = 4,
};

inline constexpr std::array<Factor, 5> kAllFactors = {
    Factor::Sufficient, Factor::Necessary, Factor::HalpernPearl, Factor::NormViolated,
    Factor::BehaviorIntended};

const char* factor_key(Factor f) noexcept; // dataset JSON key
bool factor_value(const FactorVector& v, Factor f) noexcept;
void set_factor(FactorVector& v, Factor f, bool value) noexcept;

struct EventMatchConfig {
    double jaccard_threshold = 0.5;
};

/// Similarity of two names as Jaccard over lowercased, punctuation-stripped
/// token sets.
double token_set_jaccard(std::string_view a, std::string_view b);

struct MatchedPair {
    EventName predicted;
    EventName gold;
    double similarity = 0;
    std::array<bool, 5> factor_correct{};
};

struct EventMatch {
    std::vector<MatchedPair> pairs; // gold order
    double ce_score = 0;            // matched gold causal events / gold causal events
    double oe_score = 0;            // outcome pair matched: 1, else 0
};

/// Greedy maximum-similarity bipartite matching between predicted and gold
/// causal events; a pair matches at or above the threshold (exact names
/// short-circuit).
EventMatch event_match(const CausalSetting& predicted, const CausalSetting& gold,
                       const EventMatchConfig& config = {});

struct RunRecord {
    std::size_t sample_index = 0;
    std::vector<YesNo> predicted;
    std::vector<YesNo> gold;
    std::optional<CausalSetting> predicted_setting;
    EventMatch match;
    bool failed = false;
    std::string failure;
};

struct RunConfig {
    AnnotatorConfig annotator;
    ResolverPolicy policy;
    EventMatchConfig matching;
    int parallelism = 1; // 1 = serial reference path; >1 fans out across samples
};

/// Annotate -> judge -> score for every sample. Records are produced in
/// sample order regardless of execution interleaving; per-record failures
/// are captured, never thrown.
std::vector<RunRecord> run_dataset(const Dataset& dataset, const RunConfig& config);
std::vector<RunRecord> run_dataset(const Dataset& dataset, const RunConfig& config,
                                   const Annotator& annotator);

struct MetricsSummary {
    std::size_t record_count = 0;
    std::size_t total_answers = 0;
    std::size_t correct_answers = 0;
    double accuracy = 0;
    double ce = 0;
    double oe = 0;
    std::array<double, 5> factor_accuracy{};
    std::array<std::size_t, 5> factor_bits{}; // denominator: matched-event bits

    Json to_json() const;
    std::string to_text() const;
};

MetricsSummary metrics(const std::vector<RunRecord>& records);

/// Accuracy delta per factor when that factor's predicted values are replaced
/// by gold on matched events and the judgments are replayed.
std::map<Factor, double> factor_flip_analysis(const std::vector<RunRecord>& records,
                                              const Dataset& dataset, const RunConfig& config);

} // namespace ac
