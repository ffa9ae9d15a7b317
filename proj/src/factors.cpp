#include "ac/factors.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <cctype>

namespace ac {

YesNo parse_yesno(const std::string& text) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "yes") return YesNo::Yes;
    if (lower == "no") return YesNo::No;
    fail(Errc::MalformedDocument, "expected Yes/No, got '" + text + "'");
}

Json FactorVector::to_json() const {
    Json doc;
    doc["occur"] = occur;
    doc["order"] = order;
    doc["focal"] = focal;
    doc["sufficient"] = sufficient;
    doc["necessary"] = necessary;
    doc["halpern_pearl"] = halpern_pearl;
    doc["norm_violated"] = norm_violated;
    doc["behavior_intended"] = behavior_intended;
    return doc;
}

namespace {

bool read_bool(const Json& doc, const char* key, bool fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<long>() != 0;
    fail(Errc::MalformedDocument, std::string("field '") + key + "' is not boolean");
}

int read_order(const Json& doc, const char* key) {
    if (!doc.contains(key)) return 0;
    const auto& v = doc.at(key);
    if (!v.is_number_integer()) {
        fail(Errc::MalformedDocument, std::string("field '") + key + "' is not an integer");
    }
    return v.get<int>();
}

} // namespace

FactorVector FactorVector::from_json(const Json& doc) {
    if (!doc.is_object()) {
        fail(Errc::MalformedDocument, "factor record is not an object");
    }
    FactorVector f;
    f.occur = read_bool(doc, "occur", false);
    f.order = read_order(doc, "order");
    f.focal = read_bool(doc, "focal", false);
    f.sufficient = read_bool(doc, "sufficient", false);
    f.necessary = read_bool(doc, "necessary", false);
    f.halpern_pearl = read_bool(doc, "halpern_pearl", false);
    f.norm_violated = read_bool(doc, "norm_violated", false);
    f.behavior_intended = read_bool(doc, "behavior_intended", false);
    return f;
}

void CausalSetting::add_event(EventName name, FactorVector factors) {
    if (find(name) != nullptr || (has_outcome_ && name == outcome_name_)) {
        fail(Errc::InvalidArgument, "duplicate event name '" + name.str() + "'");
    }
    events_.emplace_back(std::move(name), factors);
}

void CausalSetting::set_outcome(EventName name, OutcomeRecord record) {
    if (find(name) != nullptr) {
        fail(Errc::InvalidArgument, "outcome name '" + name.str() + "' collides with a causal event");
    }
    outcome_name_ = std::move(name);
    outcome_ = record;
    has_outcome_ = true;
}

const FactorVector* CausalSetting::find(const EventName& name) const {
    for (const auto& [n, f] : events_) {
        if (n == name) return &f;
    }
    return nullptr;
}

FactorVector* CausalSetting::find_mutable(const EventName& name) {
    for (auto& [n, f] : events_) {
        if (n == name) return &f;
    }
    return nullptr;
}

std::vector<EventName> CausalSetting::focal_events() const {
    std::vector<EventName> out;
    for (const auto& [name, factors] : events_) {
        if (factors.focal) out.push_back(name);
    }
    return out;
}

Json CausalSetting::to_json() const {
    Json causal = Json::object();
    for (const auto& [name, factors] : events_) {
        causal[name.str()] = factors.to_json();
    }
    Json doc;
    doc["causal_events"] = std::move(causal);
    Json outcome = Json::object();
    if (has_outcome_) {
        Json rec;
        rec["occur"] = outcome_.occur;
        rec["order"] = outcome_.order;
        outcome[outcome_name_.str()] = std::move(rec);
    }
    doc["outcome_event"] = std::move(outcome);
    return doc;
}

CausalSetting CausalSetting::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("causal_events") || !doc.contains("outcome_event")) {
        fail(Errc::MalformedDocument,
             "reasoning document needs 'causal_events' and 'outcome_event'");
    }
    CausalSetting setting;
    for (const auto& [name, record] : doc.at("causal_events").items()) {
        setting.add_event(EventName(name), FactorVector::from_json(record));
    }
    const auto& outcome = doc.at("outcome_event");
    if (!outcome.is_object()) {
        fail(Errc::MalformedDocument, "'outcome_event' is not an object");
    }
    size_t outcome_count = 0;
    for (const auto& [name, record] : outcome.items()) {
        if (++outcome_count > 1) {
            fail(Errc::MalformedDocument, "more than one outcome event");
        }
        OutcomeRecord rec;
        rec.occur = read_bool(record, "occur", false);
        rec.order = read_order(record, "order");
        setting.set_outcome(EventName(name), rec);
    }
    return setting;
}

std::vector<Violation> validate_setting(const CausalSetting& setting) {
    std::vector<Violation> out;
    if (setting.events().empty() || !setting.has_outcome()) {
        out.push_back({rules::kEmptySetting, "",
                       setting.events().empty() ? "no causal events" : "no outcome event"});
    }
    if (setting.has_outcome()) {
        if (!setting.outcome().occur) {
            out.push_back({rules::kOutcomeNotOccurred, setting.outcome_name().str(),
                           "outcome event must actually occur"});
        }
        if (setting.outcome().order < 0) {
            out.push_back({rules::kNegativeOrder, setting.outcome_name().str(),
                           "temporal order must be non-negative"});
        }
    }
    for (const auto& [name, f] : setting.events()) {
        if (f.necessary && !f.halpern_pearl) {
            out.push_back({rules::kNcWithoutAc, name.str(),
                           "a necessary cause is always an actual cause"});
        }
        if (f.focal && !f.occur) {
            out.push_back({rules::kFocalNotOccurred, name.str(),
                           "queried event did not occur"});
        }
        if (f.order < 0) {
            out.push_back({rules::kNegativeOrder, name.str(),
                           "temporal order must be non-negative"});
        }
    }
    return out;
}

} // namespace ac
