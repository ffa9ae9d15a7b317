#pragma once

#include "ac/names.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ac {

using Json = nlohmann::ordered_json;

enum class YesNo { No = 0, Yes = 1 };

inline const char* yesno_str(YesNo a) { return a == YesNo::Yes ? "Yes" : "No"; }
YesNo parse_yesno(const std::string& text); // case-insensitive; throws otherwise

// Per-event factor record. Field names follow the dataset's reasoning JSON
// keys: occur, order, focal, sufficient, necessary, halpern_pearl,
// norm_violated, behavior_intended.
struct FactorVector {
    bool occur = false;
    int order = 0;
    bool focal = false;
    bool sufficient = false;        // forces the outcome under every context
    bool necessary = false;         // but-for dependence
    bool halpern_pearl = false;     // actual cause under the modified definition
    bool norm_violated = false;
    bool behavior_intended = false;

    bool operator==(const FactorVector&) const = default;

    Json to_json() const;
    static FactorVector from_json(const Json& doc);
};

struct OutcomeRecord {
    bool occur = false;
    int order = 0;

    bool operator==(const OutcomeRecord&) const = default;
};

// Validation findings are data, not failures.
struct Violation {
    std::string rule;   // stable id, see rules:: below
    std::string event;  // offending event name ("" for setting-level rules)
    std::string detail;
};

namespace rules {
inline constexpr const char* kEmptySetting = "empty-setting";
inline constexpr const char* kNcWithoutAc = "nc-without-ac";
inline constexpr const char* kOutcomeNotOccurred = "outcome-not-occurred";
inline constexpr const char* kFocalNotOccurred = "focal-not-occurred";
inline constexpr const char* kNegativeOrder = "negative-order";
} // namespace rules

// Named causal events with factor vectors plus one outcome event: the
// reasoning object of a benchmark sample and the input to the judgment
// engine. Event order is insertion order and governs every enumeration.
class CausalSetting {
public:
    CausalSetting() = default;

    void add_event(EventName name, FactorVector factors);
    void set_outcome(EventName name, OutcomeRecord record);

    const std::vector<std::pair<EventName, FactorVector>>& events() const noexcept {
        return events_;
    }
    std::vector<std::pair<EventName, FactorVector>>& events_mutable() noexcept { return events_; }
    const FactorVector* find(const EventName& name) const;
    FactorVector* find_mutable(const EventName& name);

    bool has_outcome() const noexcept { return has_outcome_; }
    const EventName& outcome_name() const noexcept { return outcome_name_; }
    const OutcomeRecord& outcome() const noexcept { return outcome_; }

    std::vector<EventName> focal_events() const;

    bool operator==(const CausalSetting&) const = default;

    /// {"causal_events": {name: factors...}, "outcome_event": {name: {occur, order}}}
    Json to_json() const;
    static CausalSetting from_json(const Json& doc);

private:
    std::vector<std::pair<EventName, FactorVector>> events_;
    EventName outcome_name_;
    OutcomeRecord outcome_;
    bool has_outcome_ = false;
};

/// All violations in deterministic order (setting-level first, then per event
/// in setting order). Empty result means the setting is valid.
std::vector<Violation> validate_setting(const CausalSetting& setting);

} // namespace ac
