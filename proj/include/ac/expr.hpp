#pragma once

#include "ac/names.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace ac {

using Assignment = std::map<EventName, bool>;

class BoolExpr;
using ExprPtr = std::shared_ptr<const BoolExpr>;

// Immutable boolean expression over named variables. Structural equations,
// outcome formulas, and intervened constants are all trees of this type so
// models can be printed, serialized, and fuzzed.
class BoolExpr {
public:
    enum class Kind { Constant, Var, Not, And, Or };

    static ExprPtr constant(bool value);
    static ExprPtr var(EventName name);
    /// Literal (name = value): the variable itself, or its negation for false.
    static ExprPtr lit(EventName name, bool value);
    static ExprPtr negate(ExprPtr operand);
    static ExprPtr conj(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr disj(ExprPtr lhs, ExprPtr rhs);

    Kind kind() const noexcept { return kind_; }
    bool value() const noexcept { return value_; }
    const EventName& name() const noexcept { return name_; }
    const ExprPtr& lhs() const noexcept { return lhs_; }
    const ExprPtr& rhs() const noexcept { return rhs_; }

    /// Evaluates under a total assignment; throws unknown-variable on a miss.
    bool eval(const Assignment& values) const;

    void collect_vars(std::set<EventName>& out) const;
    std::set<EventName> vars() const;

    /// Canonical text form; parse_expr(to_string()) reproduces the tree shape.
    std::string to_string() const;

private:
    BoolExpr(Kind k, bool v, EventName n, ExprPtr l, ExprPtr r)
        : kind_(k), value_(v), name_(std::move(n)), lhs_(std::move(l)), rhs_(std::move(r)) {}

    Kind kind_;
    bool value_;
    EventName name_;
    ExprPtr lhs_;
    ExprPtr rhs_;
};

// Parses the model text grammar (documented in docs/model_format.md):
//   expr    := or
//   or      := and ('|' and)*
//   and     := unary ('&' unary)*
//   unary   := '!' unary | primary
//   primary := '(' expr ')' | '0' | '1' | identifier
// Identifiers are [A-Za-z_][A-Za-z0-9_]*. Whitespace-insensitive.
ExprPtr parse_expr(std::string_view text);

} // namespace ac
