#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace ac {

/// Trims surrounding ASCII whitespace and applies Unicode NFC normalization.
std::string normalize_name(std::string_view raw);

// Identifier of an event (exogenous/endogenous variable or narrative causal
// event). Comparison is exact after NFC normalization and whitespace trim,
// both applied once at construction.
class EventName {
public:
    EventName() = default;
    explicit EventName(std::string_view raw);

    const std::string& str() const noexcept { return text_; }
    bool empty() const noexcept { return text_.empty(); }

    friend bool operator==(const EventName& a, const EventName& b) noexcept {
        return a.text_ == b.text_;
    }
    friend std::strong_ordering operator<=>(const EventName& a, const EventName& b) noexcept {
        return a.text_ <=> b.text_;
    }

private:
    std::string text_;
};

} // namespace ac

template <>
struct std::hash<ac::EventName> {
    std::size_t operator()(const ac::EventName& n) const noexcept {
        return std::hash<std::string>{}(n.str());
    }
};
