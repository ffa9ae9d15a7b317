#include "ac/expr.hpp"

#include "ac/error.hpp"

#include <cctype>

namespace ac {

ExprPtr BoolExpr::constant(bool value) {
    return ExprPtr(new BoolExpr(Kind::Constant, value, EventName(), nullptr, nullptr));
}

ExprPtr BoolExpr::var(EventName name) {
    return ExprPtr(new BoolExpr(Kind::Var, false, std::move(name), nullptr, nullptr));
}

ExprPtr BoolExpr::lit(EventName name, bool value) {
    ExprPtr v = var(std::move(name));
    return value ? v : negate(std::move(v));
}

ExprPtr BoolExpr::negate(ExprPtr operand) {
    return ExprPtr(new BoolExpr(Kind::Not, false, EventName(), std::move(operand), nullptr));
}

ExprPtr BoolExpr::conj(ExprPtr lhs, ExprPtr rhs) {
    return ExprPtr(new BoolExpr(Kind::And, false, EventName(), std::move(lhs), std::move(rhs)));
}

ExprPtr BoolExpr::disj(ExprPtr lhs, ExprPtr rhs) {
    return ExprPtr(new BoolExpr(Kind::Or, false, EventName(), std::move(lhs), std::move(rhs)));
}

bool BoolExpr::eval(const Assignment& values) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::Var: {
            auto it = values.find(name_);
            if (it == values.end()) {
                fail(Errc::UnknownVariable, "no value for '" + name_.str() + "'");
            }
            return it->second;
        }
        case Kind::Not:
            return !lhs_->eval(values);
        case Kind::And:
            return lhs_->eval(values) && rhs_->eval(values);
        case Kind::Or:
            return lhs_->eval(values) || rhs_->eval(values);
    }
    return false;
}

void BoolExpr::collect_vars(std::set<EventName>& out) const {
    switch (kind_) {
        case Kind::Constant:
            return;
        case Kind::Var:
            out.insert(name_);
            return;
        case Kind::Not:
            lhs_->collect_vars(out);
            return;
        case Kind::And:
        case Kind::Or:
            lhs_->collect_vars(out);
            rhs_->collect_vars(out);
            return;
    }
}

std::set<EventName> BoolExpr::vars() const {
    std::set<EventName> out;
    collect_vars(out);
    return out;
}

namespace {

// Precedence: Or < And < Not/primary. Parenthesize a child whose binding is
// looser than the parent's.
int precedence(BoolExpr::Kind k) {
    switch (k) {
        case BoolExpr::Kind::Or: return 1;
        case BoolExpr::Kind::And: return 2;
        default: return 3;
    }
}

void print(const BoolExpr& e, std::string& out, int parent_prec) {
    int prec = precedence(e.kind());
    bool need_parens = prec < parent_prec;
    if (need_parens) out.push_back('(');
    switch (e.kind()) {
        case BoolExpr::Kind::Constant:
            out.push_back(e.value() ? '1' : '0');
            break;
        case BoolExpr::Kind::Var:
            out += e.name().str();
            break;
        case BoolExpr::Kind::Not:
            out.push_back('!');
            print(*e.lhs(), out, 3);
            break;
        case BoolExpr::Kind::And:
            print(*e.lhs(), out, 2);
            out += " & ";
            print(*e.rhs(), out, 2);
            break;
        case BoolExpr::Kind::Or:
            print(*e.lhs(), out, 1);
            out += " | ";
            print(*e.rhs(), out, 1);
            break;
    }
    if (need_parens) out.push_back(')');
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_or();
        skip_ws();
        if (pos_ != text_.size()) {
            fail(Errc::MalformedDocument,
                 "unexpected character '" + std::string(1, text_[pos_]) + "' at offset " +
                     std::to_string(pos_) + " in expression");
        }
        return e;
    }

private:
    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (peek() == '|') {
            ++pos_;
            lhs = BoolExpr::disj(std::move(lhs), parse_and());
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_unary();
        while (peek() == '&') {
            ++pos_;
            lhs = BoolExpr::conj(std::move(lhs), parse_unary());
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (peek() == '!') {
            ++pos_;
            return BoolExpr::negate(parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_or();
            if (peek() != ')') {
                fail(Errc::MalformedDocument, "missing ')' in expression");
            }
            ++pos_;
            return e;
        }
        if (c == '0' || c == '1') {
            ++pos_;
            return BoolExpr::constant(c == '1');
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            return BoolExpr::var(EventName(text_.substr(start, pos_ - start)));
        }
        fail(Errc::MalformedDocument, c == '\0' ? std::string("empty expression")
                                                : "unexpected character '" + std::string(1, c) +
                                                      "' in expression");
    }

    // Returns the next non-whitespace character without consuming it; '\0' at end.
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    size_t pos_ = 0;
};

} // namespace

std::string BoolExpr::to_string() const {
    std::string out;
    print(*this, out, 0);
    return out;
}

ExprPtr parse_expr(std::string_view text) {
    return Parser(text).parse();
}

} // namespace ac
