#pragma once

#include "ac/factors.hpp"

#include <map>
#include <string>
#include <vector>

namespace ac {

// Reasoning-path partitions. The partition id determines which explanation
// template family renders the answer.
enum class Partition {
    P1,              // sufficient and necessary
    P2,              // neither sufficient nor an actual cause
    P3Temporal,      // sufficient, not necessary; orders differ (preemption)
    P3Simultaneous,  // sufficient, not necessary; shared order (responsibility)
    P4Enhanced,      // actual cause with norm violation or intent
    P4Temporal,      // actual cause; temporal responsibility decides
    Ac1Fail,         // focal event or outcome did not occur
};

const char* partition_name(Partition p) noexcept;

enum class SimultaneousRule { NormIntentScore, External };
enum class TemporalRule { EarliestMoreResponsible, LatestMoreResponsible, External };

// Hook for backend-delegated responsibility resolution (one verdict per
// event: is it at least as / strictly more responsible than the rest).
class ExternalResolver {
public:
    enum class Kind { Simultaneous, Temporal };
    struct Verdict {
        YesNo answer = YesNo::No;
        std::string explanation;
    };

    virtual ~ExternalResolver() = default;
    virtual Verdict resolve(Kind kind, const EventName& focal,
                            const std::vector<EventName>& comparison,
                            const std::string& story) const = 0;
};

struct ResolverPolicy {
    SimultaneousRule simultaneous = SimultaneousRule::NormIntentScore;
    TemporalRule temporal = TemporalRule::EarliestMoreResponsible;
    const ExternalResolver* resolver = nullptr; // required for the External rules
    std::string story;                          // narrative context for the resolver
};

// Machine-readable record of the path taken for one event.
struct EventTrace {
    EventName event;
    EventName outcome;
    Partition partition = Partition::Ac1Fail;
    std::vector<int> lines;              // algorithm line ids along the path
    std::vector<EventName> comparison;   // the comparison set, in setting order
    std::map<EventName, int> scores;     // responsibility scores, when computed
    YesNo answer = YesNo::No;
    std::string rule;                    // deciding rule for responsibility partitions
    std::string resolver_note;           // external resolver explanation, if any

    Json to_json() const;
};

struct Judgment {
    YesNo answer = YesNo::No;
    std::string explanation;
    std::vector<EventTrace> traces; // one per judged event, in setting order

    Json trace_json() const;
};

/// Deterministic, total decision for a single event of a validated setting.
Judgment judge_event(const CausalSetting& setting, const EventName& event,
                     const ResolverPolicy& policy = {});

/// Judges every focal event; the overall answer is Yes iff any per-event
/// answer is Yes. Explanations concatenate in setting order.
Judgment judge_query(const CausalSetting& setting, const ResolverPolicy& policy = {});

/// Scores for simultaneous sufficient events (norm+intent by default).
std::map<EventName, int> resolve_simultaneous(const CausalSetting& setting,
                                              const std::vector<EventName>& comparison,
                                              const ResolverPolicy& policy,
                                              std::map<EventName, std::string>* notes = nullptr);

/// Scores for temporal responsibility among actual causes.
std::map<EventName, int> resolve_temporal(const CausalSetting& setting,
                                          const std::vector<EventName>& comparison,
                                          const ResolverPolicy& policy,
                                          std::map<EventName, std::string>* notes = nullptr);

/// Renders the explanation for a trace; byte-stable given equal traces.
std::string explain(const EventTrace& trace);

/// Whether the engine's answer under the policy matches the gold answer.
bool consistent_with_answer(const CausalSetting& setting, YesNo gold,
                            const ResolverPolicy& policy = {});

} // namespace ac
