#pragma once

#include "ac/expr.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <vector>

namespace ac {

using Json = nlohmann::ordered_json;

/// Assignment to the exogenous variables; must cover U exactly.
struct Context {
    Assignment values;
};

/// Forced settings for a subset of the endogenous variables. May be empty.
struct Intervention {
    Assignment settings;
};

/// Outcome formula: literals over endogenous variables combined with &, |, !.
using Formula = ExprPtr;

// Recursive structural causal model over binary events. All variables range
// over {0,1}; the endogenous dependency graph is acyclic. Immutable after
// construction; all operations are pure.
class CausalModel {
public:
    CausalModel(std::vector<EventName> exogenous,
                std::vector<EventName> endogenous,
                std::map<EventName, ExprPtr> equations);

    const std::vector<EventName>& exogenous() const noexcept { return exogenous_; }
    const std::vector<EventName>& endogenous() const noexcept { return endogenous_; }
    /// Endogenous variables in evaluation order (ties broken by declaration order).
    const std::vector<EventName>& topological_order() const noexcept { return topo_order_; }

    bool is_exogenous(const EventName& name) const;
    bool is_endogenous(const EventName& name) const;
    const ExprPtr& equation(const EventName& endogenous_name) const;

    /// Unique total assignment of V under this context, by evaluating the
    /// structural equations in topological order.
    Assignment evaluate(const Context& context) const;

    /// evaluate() with intervened variables pinned to their set values; no
    /// model copy, observationally equal to intervened(iv).evaluate(ctx).
    Assignment evaluate_under(const Context& context, const Intervention& intervention) const;

    /// Copy with each intervened variable's equation replaced by a constant.
    CausalModel intervened(const Intervention& intervention) const;

    Json to_json() const;
    static CausalModel from_json(const Json& doc);
    static CausalModel parse_model(const std::string& text);

private:
    void check_acyclic_and_order();

    std::vector<EventName> exogenous_;
    std::vector<EventName> endogenous_;
    std::map<EventName, ExprPtr> equations_;
    std::vector<EventName> topo_order_;
};

/// Whether phi holds after applying the intervention, under the context.
bool satisfies(const CausalModel& model, const Context& context,
               const Intervention& intervention, const Formula& phi);

/// All 2^|U| contexts in lexicographic order over the declared exogenous
/// ordering (first-declared variable most significant, false before true).
std::vector<Context> enumerate_contexts(const CausalModel& model, int max_exogenous = 16);

} // namespace ac
