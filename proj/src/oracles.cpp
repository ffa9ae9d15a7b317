#include "ac/oracles.hpp"

#include "ac/error.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace ac {

namespace {

void check_candidate(const CausalModel& model, const CandidateCause& candidate) {
    if (candidate.conjuncts.empty()) {
        fail(Errc::InvalidArgument, "candidate cause has no conjuncts");
    }
    for (const auto& [name, value] : candidate.conjuncts) {
        (void)value;
        if (!model.is_endogenous(name)) {
            fail(Errc::UnknownVariable, "candidate names non-endogenous '" + name.str() + "'");
        }
    }
}

bool candidate_holds(const Assignment& actual, const Assignment& conjuncts) {
    for (const auto& [name, value] : conjuncts) {
        if (actual.at(name) != value) return false;
    }
    return true;
}

// Enumerates assignments to `vars` (map order, first variable most
// significant) and calls fn for each; fn returning true stops early.
bool for_each_assignment(const std::vector<EventName>& vars,
                         const std::function<bool(const Assignment&)>& fn) {
    const size_t n = vars.size();
    if (n >= 63) {
        fail(Errc::SearchBudgetExceeded, "assignment space over " + std::to_string(n) +
                                             " variables cannot be enumerated");
    }
    for (size_t code = 0; code < (size_t(1) << n); ++code) {
        Assignment a;
        for (size_t j = 0; j < n; ++j) {
            a[vars[j]] = (code >> (n - 1 - j)) & 1u;
        }
        if (fn(a)) return true;
    }
    return false;
}

// Lexicographic combinations of {0..n-1} of a given size.
bool next_combination(std::vector<size_t>& idx, size_t n) {
    const size_t k = idx.size();
    for (size_t i = k; i-- > 0;) {
        if (idx[i] < n - (k - i)) {
            ++idx[i];
            for (size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

std::vector<EventName> candidate_vars(const CandidateCause& candidate) {
    std::vector<EventName> vars;
    for (const auto& [name, value] : candidate.conjuncts) {
        (void)value;
        vars.push_back(name);
    }
    return vars;
}

// AC2: exists W (held at actual values) and x' != x with [X<-x', W<-w*] !phi.
// Search is smallest W first, then lexicographic over declaration order;
// alternatives in counting order over the candidate's variables.
std::optional<std::pair<Assignment, Assignment>> find_ac2_witness(
    const CausalModel& model, const Context& context, const Assignment& actual,
    const CandidateCause& candidate, const Formula& phi) {
    Formula not_phi = BoolExpr::negate(phi);
    std::vector<EventName> rest;
    for (const auto& v : model.endogenous()) {
        if (!candidate.conjuncts.count(v)) rest.push_back(v);
    }
    std::vector<EventName> xvars = candidate_vars(candidate);

    std::optional<std::pair<Assignment, Assignment>> found;
    auto try_w = [&](const std::vector<size_t>& picked) {
        Assignment freeze;
        for (size_t i : picked) freeze[rest[i]] = actual.at(rest[i]);
        return for_each_assignment(xvars, [&](const Assignment& alt) {
            if (alt == candidate.conjuncts) return false;
            Intervention iv;
            iv.settings = alt;
            for (const auto& [w, wv] : freeze) iv.settings[w] = wv;
            if (satisfies(model, context, iv, not_phi)) {
                found = std::make_pair(freeze, alt);
                return true;
            }
            return false;
        });
    };

    for (size_t size = 0; size <= rest.size(); ++size) {
        if (size == 0) {
            if (try_w({})) return found;
            continue;
        }
        std::vector<size_t> idx(size);
        for (size_t i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            if (try_w(idx)) return found;
            if (!next_combination(idx, rest.size())) break;
        }
    }
    return std::nullopt;
}

void check_search_budget(const CausalModel& model, const CandidateCause& candidate,
                         const SearchBudget& budget) {
    const size_t rest = model.endogenous().size() - candidate.conjuncts.size();
    if (rest + candidate.conjuncts.size() >= 63) {
        fail(Errc::SearchBudgetExceeded, "search space exceeds the representable range");
    }
    const std::uint64_t combos =
        (std::uint64_t(1) << rest) * (std::uint64_t(1) << candidate.conjuncts.size());
    if (combos > budget.max_combinations) {
        fail(Errc::SearchBudgetExceeded,
             std::to_string(combos) + " contingency/alternative combinations exceed budget " +
                 std::to_string(budget.max_combinations));
    }
}

bool ac1_holds(const Assignment& actual, const CandidateCause& candidate, const Formula& phi) {
    return candidate_holds(actual, candidate.conjuncts) && phi->eval(actual);
}

// AC1 and AC2 only; used for the minimality re-checks, where no witness is kept.
bool ac1_ac2_hold(const CausalModel& model, const Context& context, const Assignment& actual,
                  const CandidateCause& candidate, const Formula& phi) {
    if (!ac1_holds(actual, candidate, phi)) return false;
    return find_ac2_witness(model, context, actual, candidate, phi).has_value();
}

// Strict non-empty sub-candidates, by conjunct bitmask in counting order.
bool any_strict_subset(const CandidateCause& candidate,
                       const std::function<bool(const CandidateCause&)>& fn) {
    std::vector<std::pair<EventName, bool>> items(candidate.conjuncts.begin(),
                                                  candidate.conjuncts.end());
    const size_t k = items.size();
    for (size_t mask = 1; mask + 1 < (size_t(1) << k); ++mask) {
        CandidateCause sub;
        for (size_t j = 0; j < k; ++j) {
            if ((mask >> j) & 1u) sub.conjuncts.insert(items[j]);
        }
        if (fn(sub)) return true;
    }
    return false;
}

} // namespace

ActualCauseWitness::ActualCauseWitness(const CausalModel& model, const Context& context,
                                       const CandidateCause& candidate, const Formula& phi,
                                       Assignment contingency, Assignment alternative)
    : contingency_(std::move(contingency)), alternative_(std::move(alternative)) {
    for (const auto& [w, value] : contingency_) {
        (void)value;
        if (candidate.conjuncts.count(w)) {
            throw std::logic_error("witness contingency overlaps the candidate: " + w.str());
        }
    }
    Intervention iv;
    iv.settings = alternative_;
    for (const auto& [w, wv] : contingency_) iv.settings[w] = wv;
    if (!satisfies(model, context, iv, BoolExpr::negate(phi))) {
        throw std::logic_error("witness does not replay to the negated outcome");
    }
}

Json ActualCauseWitness::to_json() const {
    Json w = Json::object();
    for (const auto& [name, value] : contingency_) w[name.str()] = value;
    Json alt = Json::object();
    for (const auto& [name, value] : alternative_) alt[name.str()] = value;
    Json doc;
    doc["contingency"] = std::move(w);
    doc["alternative"] = std::move(alt);
    return doc;
}

bool is_but_for_cause(const CausalModel& model, const Context& context,
                      const CandidateCause& candidate, const Formula& phi,
                      std::string* why_not) {
    check_candidate(model, candidate);
    Assignment actual = model.evaluate(context);
    if (!candidate_holds(actual, candidate.conjuncts)) {
        if (why_not) *why_not = "candidate does not hold in the actual setting";
        return false;
    }
    if (!phi->eval(actual)) {
        if (why_not) *why_not = "outcome does not hold in the actual setting";
        return false;
    }
    Formula not_phi = BoolExpr::negate(phi);
    std::vector<EventName> xvars = candidate_vars(candidate);
    bool found = for_each_assignment(xvars, [&](const Assignment& alt) {
        if (alt == candidate.conjuncts) return false;
        Intervention iv;
        iv.settings = alt;
        return satisfies(model, context, iv, not_phi);
    });
    if (!found && why_not) *why_not = "no alternative value falsifies the outcome";
    return found;
}

ActualCauseResult is_actual_cause(const CausalModel& model, const Context& context,
                                  const CandidateCause& candidate, const Formula& phi,
                                  const SearchBudget& budget) {
    check_candidate(model, candidate);
    check_search_budget(model, candidate, budget);
    Assignment actual = model.evaluate(context);
    if (!ac1_holds(actual, candidate, phi)) {
        return {};
    }
    auto witness = find_ac2_witness(model, context, actual, candidate, phi);
    if (!witness) {
        return {};
    }
    bool minimality_broken = any_strict_subset(candidate, [&](const CandidateCause& sub) {
        return ac1_ac2_hold(model, context, actual, sub, phi);
    });
    if (minimality_broken) {
        return {};
    }
    ActualCauseResult result;
    result.holds = true;
    result.witness.emplace(model, context, candidate, phi, witness->first, witness->second);
    return result;
}

namespace {

// SC2: some actual cause of phi shares a conjunct with the candidate. The
// search ranges over subsets of V at their actual values (smallest first,
// lexicographic), restricted to sets intersecting the candidate's variables.
bool sc2_holds(const CausalModel& model, const Context& context, const Assignment& actual,
               const CandidateCause& candidate, const Formula& phi, const SearchBudget& budget) {
    const auto& endo = model.endogenous();
    const size_t n = endo.size();
    for (size_t size = 1; size <= n; ++size) {
        std::vector<size_t> idx(size);
        for (size_t i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            CandidateCause z;
            bool intersects = false;
            for (size_t i : idx) {
                z.conjuncts[endo[i]] = actual.at(endo[i]);
                if (candidate.conjuncts.count(endo[i])) intersects = true;
            }
            if (intersects && is_actual_cause(model, context, z, phi, budget).holds) {
                return true;
            }
            if (!next_combination(idx, n)) break;
        }
    }
    return false;
}

bool sc3_holds(const CausalModel& model, const CandidateCause& candidate, const Formula& phi,
               const SearchBudget& budget) {
    Intervention force;
    force.settings = candidate.conjuncts;
    for (const auto& u : enumerate_contexts(model, budget.max_exogenous)) {
        if (!satisfies(model, u, force, phi)) return false;
    }
    return true;
}

bool sc123_hold(const CausalModel& model, const Context& context, const Assignment& actual,
                const CandidateCause& candidate, const Formula& phi, const SearchBudget& budget) {
    return ac1_holds(actual, candidate, phi) &&
           sc2_holds(model, context, actual, candidate, phi, budget) &&
           sc3_holds(model, candidate, phi, budget);
}

} // namespace

SufficientCauseResult is_sufficient_cause(const CausalModel& model, const Context& context,
                                          const CandidateCause& candidate, const Formula& phi,
                                          const SearchBudget& budget) {
    check_candidate(model, candidate);
    Assignment actual = model.evaluate(context);
    if (!ac1_holds(actual, candidate, phi)) {
        return {false, "SC1"};
    }
    if (!sc2_holds(model, context, actual, candidate, phi, budget)) {
        return {false, "SC2"};
    }
    if (!sc3_holds(model, candidate, phi, budget)) {
        return {false, "SC3"};
    }
    bool minimality_broken = any_strict_subset(candidate, [&](const CandidateCause& sub) {
        return sc123_hold(model, context, actual, sub, phi, budget);
    });
    if (minimality_broken) {
        return {false, "SC4"};
    }
    return {true, ""};
}

Responsibility naive_responsibility(const CausalModel& model, const Context& context,
                                    const CandidateCause& candidate, const Formula& phi,
                                    const SearchBudget& budget, bool allow_formula_vars) {
    check_candidate(model, candidate);
    Assignment actual = model.evaluate(context);
    if (!ac1_holds(actual, candidate, phi)) {
        return {0, 1};
    }
    std::set<EventName> excluded;
    for (const auto& [name, value] : candidate.conjuncts) {
        (void)value;
        excluded.insert(name);
    }
    if (!allow_formula_vars) {
        for (const auto& name : phi->vars()) excluded.insert(name);
    }
    std::vector<EventName> pool;
    for (const auto& v : model.endogenous()) {
        if (!excluded.count(v)) pool.push_back(v);
    }
    if (pool.size() + candidate.conjuncts.size() >= 63) {
        fail(Errc::SearchBudgetExceeded, "flip space exceeds the representable range");
    }
    const std::uint64_t combos =
        (std::uint64_t(1) << pool.size()) * (std::uint64_t(1) << candidate.conjuncts.size());
    if (combos > budget.max_combinations) {
        fail(Errc::SearchBudgetExceeded,
             std::to_string(combos) + " flip/alternative combinations exceed budget " +
                 std::to_string(budget.max_combinations));
    }

    for (size_t flips = 0; flips <= pool.size(); ++flips) {
        std::vector<size_t> idx(flips);
        for (size_t i = 0; i < flips; ++i) idx[i] = i;
        while (true) {
            Intervention iv;
            for (size_t i : idx) iv.settings[pool[i]] = !actual.at(pool[i]);
            if (is_but_for_cause(model.intervened(iv), context, candidate, phi)) {
                return {1, 1 + static_cast<long>(flips)};
            }
            if (flips == 0 || !next_combination(idx, pool.size())) break;
        }
    }
    return {0, 1};
}

FactorVector derive_factors(const CausalModel& model, const Context& context,
                            const EventName& event, const Formula& phi,
                            const std::map<EventName, int>& order_map,
                            const SearchBudget& budget) {
    if (!model.is_endogenous(event)) {
        fail(Errc::UnknownVariable, "'" + event.str() + "' is not endogenous");
    }
    auto order_it = order_map.find(event);
    if (order_it == order_map.end()) {
        fail(Errc::UnknownEvent, "order map does not cover '" + event.str() + "'");
    }
    Assignment actual = model.evaluate(context);
    CandidateCause cand = CandidateCause::single(event, actual.at(event));

    FactorVector f;
    f.occur = actual.at(event);
    f.order = order_it->second;
    f.sufficient = is_sufficient_cause(model, context, cand, phi, budget).holds;
    f.necessary = is_but_for_cause(model, context, cand, phi);
    f.halpern_pearl = is_actual_cause(model, context, cand, phi, budget).holds;
    return f;
}

} // namespace ac
