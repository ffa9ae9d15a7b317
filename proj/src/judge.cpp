#include "ac/judge.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <set>

namespace ac {

const char* partition_name(Partition p) noexcept {
    switch (p) {
        case Partition::P1:             return "P1";
        case Partition::P2:             return "P2";
        case Partition::P3Temporal:     return "P3-temporal";
        case Partition::P3Simultaneous: return "P3-simultaneous";
        case Partition::P4Enhanced:     return "P4-enhanced";
        case Partition::P4Temporal:     return "P4-temporal";
        case Partition::Ac1Fail:        return "AC1-fail";
    }
    return "?";
}

namespace {

const char* temporal_rule_name(TemporalRule r) {
    switch (r) {
        case TemporalRule::EarliestMoreResponsible: return "earliest-more-responsible";
        case TemporalRule::LatestMoreResponsible:   return "latest-more-responsible";
        case TemporalRule::External:                return "external";
    }
    return "?";
}

const char* simultaneous_rule_name(SimultaneousRule r) {
    return r == SimultaneousRule::NormIntentScore ? "norm-intent-score" : "external";
}

// Hard violations make a setting unjudgeable; occurrence violations do not
// (they resolve to a No answer on the AC1-fail path instead).
void reject_hard_violations(const CausalSetting& setting) {
    for (const auto& v : validate_setting(setting)) {
        if (v.rule == rules::kNcWithoutAc || v.rule == rules::kNegativeOrder ||
            v.rule == rules::kEmptySetting) {
            fail(Errc::InvalidSetting,
                 std::string(v.rule) + (v.event.empty() ? "" : " (" + v.event + ")") + ": " +
                     v.detail);
        }
    }
}

ExternalResolver::Verdict call_resolver(const ResolverPolicy& policy, ExternalResolver::Kind kind,
                                        const EventName& focal,
                                        const std::vector<EventName>& others) {
    if (policy.resolver == nullptr) {
        fail(Errc::ExternalResolverFailure, "external rule selected but no backend configured");
    }
    try {
        return policy.resolver->resolve(kind, focal, others, policy.story);
    } catch (const Error& e) {
        fail(Errc::ExternalResolverFailure, e.what());
    }
}

std::vector<EventName> comparison_minus(const std::vector<EventName>& comparison,
                                        const EventName& focal) {
    std::vector<EventName> others;
    for (const auto& n : comparison) {
        if (!(n == focal)) others.push_back(n);
    }
    return others;
}

std::string format_names(const std::vector<EventName>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += "; ";
        out += n.str();
    }
    return out;
}

std::string format_scores(const std::vector<EventName>& order,
                          const std::map<EventName, int>& scores) {
    std::string out;
    for (const auto& n : order) {
        if (!out.empty()) out += "; ";
        out += n.str() + "=" + std::to_string(scores.at(n));
    }
    return out;
}

} // namespace

std::map<EventName, int> resolve_simultaneous(const CausalSetting& setting,
                                              const std::vector<EventName>& comparison,
                                              const ResolverPolicy& policy,
                                              std::map<EventName, std::string>* notes) {
    if (comparison.empty()) {
        fail(Errc::InvalidArgument, "empty comparison set");
    }
    std::set<int> orders;
    for (const auto& n : comparison) {
        const FactorVector* f = setting.find(n);
        if (!f) fail(Errc::UnknownEvent, "'" + n.str() + "' is not in the setting");
        orders.insert(f->order);
    }
    if (orders.size() != 1) {
        fail(Errc::InvalidArgument, "simultaneous resolution requires one shared order");
    }
    std::map<EventName, int> scores;
    for (const auto& n : comparison) {
        if (policy.simultaneous == SimultaneousRule::NormIntentScore) {
            const FactorVector& f = *setting.find(n);
            scores[n] = (f.norm_violated ? 1 : 0) + (f.behavior_intended ? 1 : 0);
        } else {
            auto verdict = call_resolver(policy, ExternalResolver::Kind::Simultaneous, n,
                                         comparison_minus(comparison, n));
            scores[n] = verdict.answer == YesNo::Yes ? 1 : 0;
            if (notes) (*notes)[n] = verdict.explanation;
        }
    }
    return scores;
}

std::map<EventName, int> resolve_temporal(const CausalSetting& setting,
                                          const std::vector<EventName>& comparison,
                                          const ResolverPolicy& policy,
                                          std::map<EventName, std::string>* notes) {
    if (comparison.empty()) {
        fail(Errc::InvalidArgument, "empty comparison set");
    }
    std::map<EventName, int> scores;
    for (const auto& n : comparison) {
        const FactorVector* f = setting.find(n);
        if (!f) fail(Errc::UnknownEvent, "'" + n.str() + "' is not in the setting");
        switch (policy.temporal) {
            case TemporalRule::EarliestMoreResponsible:
                scores[n] = -f->order;
                break;
            case TemporalRule::LatestMoreResponsible:
                scores[n] = f->order;
                break;
            case TemporalRule::External: {
                auto verdict = call_resolver(policy, ExternalResolver::Kind::Temporal, n,
                                             comparison_minus(comparison, n));
                scores[n] = verdict.answer == YesNo::Yes ? 1 : 0;
                if (notes) (*notes)[n] = verdict.explanation;
                break;
            }
        }
    }
    return scores;
}

std::string explain(const EventTrace& trace) {
    const std::string& e = trace.event.str();
    const std::string& o = trace.outcome.str();
    switch (trace.partition) {
        case Partition::P1:
            return e + " is a cause of " + o + ", since " + e +
                   " is both sufficient and necessary.";
        case Partition::P2:
            return e + " is not a cause of " + o + ", since " + e +
                   " is neither sufficient nor necessary.";
        case Partition::P3Temporal:
            if (trace.answer == YesNo::Yes) {
                return e + " is a cause of " + o + ", since " + e +
                       " occurs the earliest in a disjunctive causal structure.";
            }
            return e + " is not a cause of " + o + ", since " + e +
                   " does not occur the earliest in a disjunctive causal structure.";
        case Partition::P4Enhanced:
            return e + " is a cause of " + o + ", since " + e +
                   " is an actual cause and it violates a norm or is an intended behavior of an agent.";
        case Partition::P3Simultaneous: {
            std::string head = trace.answer == YesNo::Yes ? " is a cause of " : " is not a cause of ";
            std::string tail = trace.answer == YesNo::Yes
                                   ? " attains the maximum score."
                                   : " does not attain the maximum score.";
            return e + head + o + ": among the simultaneous sufficient events (" +
                   format_names(trace.comparison) + "), the responsibility scores are (" +
                   format_scores(trace.comparison, trace.scores) + ") under the " +
                   trace.rule + " rule, and " + e + tail;
        }
        case Partition::P4Temporal: {
            std::string head = trace.answer == YesNo::Yes ? " is a cause of " : " is not a cause of ";
            std::string tail = trace.answer == YesNo::Yes
                                   ? " alone attains the maximum score."
                                   : " does not uniquely attain the maximum score.";
            return e + head + o + ": among the actual causes (" + format_names(trace.comparison) +
                   "), the responsibility scores are (" + format_scores(trace.comparison, trace.scores) +
                   ") under the " + trace.rule + " rule, and " + e + tail;
        }
        case Partition::Ac1Fail:
            return e + " is not a cause of " + o + ", since " + format_names(trace.comparison) +
                   " did not actually occur.";
    }
    return "";
}

Judgment judge_event(const CausalSetting& setting, const EventName& event,
                     const ResolverPolicy& policy) {
    reject_hard_violations(setting);
    const FactorVector* found = setting.find(event);
    if (!found) {
        fail(Errc::UnknownEvent, "'" + event.str() + "' is not a causal event of the setting");
    }
    const FactorVector& f = *found;

    EventTrace trace;
    trace.event = event;
    trace.outcome = setting.outcome_name();

    if (!f.occur || !setting.outcome().occur) {
        trace.partition = Partition::Ac1Fail;
        trace.answer = YesNo::No;
        if (!f.occur) trace.comparison.push_back(event);
        if (!setting.outcome().occur) trace.comparison.push_back(setting.outcome_name());
    } else if (f.sufficient && f.necessary) {
        trace.partition = Partition::P1;
        trace.answer = YesNo::Yes;
        trace.lines = {4};
    } else if (!f.sufficient && !f.halpern_pearl) {
        trace.partition = Partition::P2;
        trace.answer = YesNo::No;
        trace.lines = {5};
    } else if (f.sufficient && !f.necessary) {
        // Alternative sufficient events: preemption is decided by temporal
        // order (the earliest takes effect); simultaneous events fall back to
        // responsibility scores, where a full tie is overdetermination and
        // every tied event counts as a cause.
        std::vector<EventName> cs;
        std::set<int> orders;
        for (const auto& [name, g] : setting.events()) {
            if (g.sufficient && !g.necessary) {
                cs.push_back(name);
                orders.insert(g.order);
            }
        }
        trace.comparison = cs;
        if (orders.size() != 1) {
            int min_order = *orders.begin();
            trace.partition = Partition::P3Temporal;
            trace.answer = f.order == min_order ? YesNo::Yes : YesNo::No;
            trace.lines = {6, 7, 8, trace.answer == YesNo::Yes ? 9 : 10};
        } else {
            std::map<EventName, std::string> notes;
            trace.partition = Partition::P3Simultaneous;
            trace.scores = resolve_simultaneous(setting, cs, policy, &notes);
            int best = trace.scores.begin()->second;
            for (const auto& [n, s] : trace.scores) best = std::max(best, s);
            trace.answer = trace.scores.at(event) == best ? YesNo::Yes : YesNo::No;
            trace.lines = {6, 7, 11, 12, trace.answer == YesNo::Yes ? 13 : 14};
            trace.rule = simultaneous_rule_name(policy.simultaneous);
            if (auto it = notes.find(event); it != notes.end()) {
                trace.resolver_note = it->second;
            }
        }
    } else {
        // Actual cause that is not sufficient: norm violation or intent makes
        // it a cause outright; otherwise the uniquely most responsible event
        // by temporal order wins.
        if (f.norm_violated || f.behavior_intended) {
            trace.partition = Partition::P4Enhanced;
            trace.answer = YesNo::Yes;
            trace.lines = {15, 16};
        } else {
            std::vector<EventName> ca;
            for (const auto& [name, g] : setting.events()) {
                if (!g.sufficient && g.halpern_pearl) ca.push_back(name);
            }
            trace.comparison = ca;
            std::map<EventName, std::string> notes;
            trace.partition = Partition::P4Temporal;
            trace.scores = resolve_temporal(setting, ca, policy, &notes);
            int best = trace.scores.begin()->second;
            int best_count = 0;
            for (const auto& [n, s] : trace.scores) best = std::max(best, s);
            for (const auto& [n, s] : trace.scores) {
                if (s == best) ++best_count;
            }
            bool unique_max = trace.scores.at(event) == best && best_count == 1;
            trace.answer = unique_max ? YesNo::Yes : YesNo::No;
            trace.lines = {15, 18, 19, trace.answer == YesNo::Yes ? 20 : 21};
            trace.rule = temporal_rule_name(policy.temporal);
            if (auto it = notes.find(event); it != notes.end()) {
                trace.resolver_note = it->second;
            }
        }
    }

    Judgment judgment;
    judgment.answer = trace.answer;
    judgment.explanation = explain(trace);
    judgment.traces.push_back(std::move(trace));
    return judgment;
}

Judgment judge_query(const CausalSetting& setting, const ResolverPolicy& policy) {
    reject_hard_violations(setting);
    std::vector<EventName> focal = setting.focal_events();
    if (focal.empty()) {
        fail(Errc::NoFocalEvent, "no event is marked focal");
    }
    Judgment overall;
    overall.answer = YesNo::No;
    for (const auto& name : focal) {
        Judgment one = judge_event(setting, name, policy);
        if (one.answer == YesNo::Yes) overall.answer = YesNo::Yes;
        if (!overall.explanation.empty()) overall.explanation += "\n";
        overall.explanation += one.explanation;
        overall.traces.push_back(std::move(one.traces.front()));
    }
    return overall;
}

bool consistent_with_answer(const CausalSetting& setting, YesNo gold,
                            const ResolverPolicy& policy) {
    return judge_query(setting, policy).answer == gold;
}

Json EventTrace::to_json() const {
    Json doc;
    doc["event"] = event.str();
    doc["outcome"] = outcome.str();
    doc["partition"] = partition_name(partition);
    doc["lines"] = lines;
    Json cmp = Json::array();
    for (const auto& n : comparison) cmp.push_back(n.str());
    doc["comparison"] = std::move(cmp);
    Json sc = Json::object();
    for (const auto& [n, s] : scores) sc[n.str()] = s;
    doc["scores"] = std::move(sc);
    doc["answer"] = yesno_str(answer);
    if (!rule.empty()) doc["rule"] = rule;
    if (!resolver_note.empty()) doc["resolver_note"] = resolver_note;
    return doc;
}

Json Judgment::trace_json() const {
    Json doc;
    doc["answer"] = yesno_str(answer);
    Json list = Json::array();
    for (const auto& t : traces) list.push_back(t.to_json());
    doc["events"] = std::move(list);
    return doc;
}

} // namespace ac
