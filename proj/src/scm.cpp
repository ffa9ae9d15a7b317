#include "ac/scm.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <set>

namespace ac {

CausalModel::CausalModel(std::vector<EventName> exogenous,
                         std::vector<EventName> endogenous,
                         std::map<EventName, ExprPtr> equations)
    : exogenous_(std::move(exogenous)),
      endogenous_(std::move(endogenous)),
      equations_(std::move(equations)) {
    std::set<EventName> seen;
    for (const auto& u : exogenous_) {
        if (!seen.insert(u).second) {
            fail(Errc::InvalidArgument, "duplicate variable '" + u.str() + "'");
        }
    }
    for (const auto& v : endogenous_) {
        if (!seen.insert(v).second) {
            fail(Errc::InvalidArgument, "duplicate variable '" + v.str() + "'");
        }
    }
    for (const auto& v : endogenous_) {
        if (!equations_.count(v)) {
            fail(Errc::InvalidArgument, "missing equation for '" + v.str() + "'");
        }
    }
    if (equations_.size() != endogenous_.size()) {
        for (const auto& [name, eq] : equations_) {
            (void)eq;
            if (!std::count(endogenous_.begin(), endogenous_.end(), name)) {
                fail(Errc::InvalidArgument,
                     "equation for undeclared variable '" + name.str() + "'");
            }
        }
    }
    for (const auto& [name, eq] : equations_) {
        for (const auto& parent : eq->vars()) {
            if (!seen.count(parent)) {
                fail(Errc::UnknownVariable, "equation for '" + name.str() +
                                                "' references undeclared '" + parent.str() + "'");
            }
        }
    }
    check_acyclic_and_order();
}

void CausalModel::check_acyclic_and_order() {
    // Kahn's algorithm restricted to endogenous-to-endogenous edges; among
    // ready nodes the declaration order wins, so the order is reproducible.
    std::map<EventName, std::set<EventName>> endo_parents;
    std::map<EventName, int> pending;
    for (const auto& v : endogenous_) {
        std::set<EventName> parents;
        for (const auto& p : equations_.at(v)->vars()) {
            if (is_endogenous(p)) parents.insert(p);
        }
        pending[v] = static_cast<int>(parents.size());
        endo_parents[v] = std::move(parents);
    }
    topo_order_.clear();
    std::set<EventName> placed;
    while (topo_order_.size() < endogenous_.size()) {
        bool progressed = false;
        for (const auto& v : endogenous_) {
            if (placed.count(v) || pending[v] != 0) continue;
            topo_order_.push_back(v);
            placed.insert(v);
            for (const auto& w : endogenous_) {
                if (!placed.count(w) && endo_parents[w].count(v)) --pending[w];
            }
            progressed = true;
        }
        if (!progressed) {
            std::string stuck;
            for (const auto& v : endogenous_) {
                if (!placed.count(v)) {
                    if (!stuck.empty()) stuck += ", ";
                    stuck += v.str();
                }
            }
            fail(Errc::CyclicModel, "dependency cycle among {" + stuck + "}");
        }
    }
}

bool CausalModel::is_exogenous(const EventName& name) const {
    return std::count(exogenous_.begin(), exogenous_.end(), name) != 0;
}

bool CausalModel::is_endogenous(const EventName& name) const {
    return equations_.count(name) != 0;
}

const ExprPtr& CausalModel::equation(const EventName& endogenous_name) const {
    auto it = equations_.find(endogenous_name);
    if (it == equations_.end()) {
        fail(Errc::UnknownVariable, "'" + endogenous_name.str() + "' is not endogenous");
    }
    return it->second;
}

Assignment CausalModel::evaluate(const Context& context) const {
    return evaluate_under(context, Intervention{});
}

Assignment CausalModel::evaluate_under(const Context& context,
                                       const Intervention& intervention) const {
    for (const auto& u : exogenous_) {
        if (!context.values.count(u)) {
            fail(Errc::MissingContextVariable, "context omits '" + u.str() + "'");
        }
    }
    for (const auto& [name, value] : context.values) {
        (void)value;
        if (!is_exogenous(name)) {
            fail(Errc::UnknownVariable, "context assigns non-exogenous '" + name.str() + "'");
        }
    }
    for (const auto& [name, value] : intervention.settings) {
        (void)value;
        if (!is_endogenous(name)) {
            fail(Errc::UnknownVariable,
                 "intervention targets non-endogenous '" + name.str() + "'");
        }
    }
    if (topo_order_.size() != endogenous_.size()) {
        fail(Errc::CyclicModel, "model has no complete evaluation order");
    }
    Assignment values = context.values;
    for (const auto& v : topo_order_) {
        auto pinned = intervention.settings.find(v);
        values[v] = pinned != intervention.settings.end() ? pinned->second
                                                          : equations_.at(v)->eval(values);
    }
    Assignment endo_only;
    for (const auto& v : endogenous_) {
        endo_only[v] = values.at(v);
    }
    return endo_only;
}

CausalModel CausalModel::intervened(const Intervention& intervention) const {
    std::map<EventName, ExprPtr> equations = equations_;
    for (const auto& [name, value] : intervention.settings) {
        if (!is_endogenous(name)) {
            fail(Errc::UnknownVariable,
                 "intervention targets non-endogenous '" + name.str() + "'");
        }
        equations[name] = BoolExpr::constant(value);
    }
    return CausalModel(exogenous_, endogenous_, std::move(equations));
}

bool satisfies(const CausalModel& model, const Context& context,
               const Intervention& intervention, const Formula& phi) {
    for (const auto& name : phi->vars()) {
        if (!model.is_endogenous(name)) {
            fail(Errc::UnknownVariable, "formula names non-endogenous '" + name.str() + "'");
        }
    }
    return phi->eval(model.evaluate_under(context, intervention));
}

std::vector<Context> enumerate_contexts(const CausalModel& model, int max_exogenous) {
    const auto& exo = model.exogenous();
    if (static_cast<int>(exo.size()) > max_exogenous) {
        fail(Errc::TooManyExogenous, std::to_string(exo.size()) + " exogenous variables exceed limit " +
                                         std::to_string(max_exogenous));
    }
    const size_t n = exo.size();
    std::vector<Context> out;
    out.reserve(size_t(1) << n);
    for (size_t code = 0; code < (size_t(1) << n); ++code) {
        Context ctx;
        for (size_t j = 0; j < n; ++j) {
            bool bit = (code >> (n - 1 - j)) & 1u; // first-declared most significant
            ctx.values[exo[j]] = bit;
        }
        out.push_back(std::move(ctx));
    }
    return out;
}

Json CausalModel::to_json() const {
    Json doc;
    doc["exogenous"] = Json::array();
    for (const auto& u : exogenous_) doc["exogenous"].push_back(u.str());
    doc["endogenous"] = Json::array();
    for (const auto& v : endogenous_) doc["endogenous"].push_back(v.str());
    Json eqs = Json::object();
    for (const auto& v : endogenous_) {
        eqs[v.str()] = equations_.at(v)->to_string();
    }
    doc["equations"] = std::move(eqs);
    return doc;
}

CausalModel CausalModel::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("exogenous") || !doc.contains("endogenous") ||
        !doc.contains("equations")) {
        fail(Errc::MalformedDocument,
             "model document needs 'exogenous', 'endogenous', and 'equations'");
    }
    std::vector<EventName> exo, endo;
    for (const auto& u : doc.at("exogenous")) exo.emplace_back(u.get<std::string>());
    for (const auto& v : doc.at("endogenous")) endo.emplace_back(v.get<std::string>());
    std::map<EventName, ExprPtr> equations;
    for (const auto& [key, value] : doc.at("equations").items()) {
        equations[EventName(key)] = parse_expr(value.get<std::string>());
    }
    return CausalModel(std::move(exo), std::move(endo), std::move(equations));
}

CausalModel CausalModel::parse_model(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        fail(Errc::MalformedDocument, "model text is not valid JSON");
    }
    return from_json(doc);
}

} // namespace ac
