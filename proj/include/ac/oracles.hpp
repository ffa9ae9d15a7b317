#pragma once

#include "ac/factors.hpp"
#include "ac/scm.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ac {

struct SearchBudget {
    std::uint64_t max_combinations = std::uint64_t(1) << 20;
    int max_exogenous = 16;
};

/// Candidate cause X = x: a non-empty conjunction over distinct endogenous
/// variables. Values are the ones the candidate asserts (usually actual).
struct CandidateCause {
    Assignment conjuncts;

    static CandidateCause single(const EventName& name, bool value) {
        CandidateCause c;
        c.conjuncts[name] = value;
        return c;
    }
};

// Witness for AC2: a contingency set W held at its actual values w* and an
// alternative assignment x' to the candidate's variables. Replaying the
// witness must falsify phi; the constructor re-checks this.
class ActualCauseWitness {
public:
    ActualCauseWitness(const CausalModel& model, const Context& context,
                       const CandidateCause& candidate, const Formula& phi,
                       Assignment contingency, Assignment alternative);

    const Assignment& contingency() const noexcept { return contingency_; } // W = w*
    const Assignment& alternative() const noexcept { return alternative_; } // x'

    Json to_json() const;

private:
    Assignment contingency_;
    Assignment alternative_;
};

struct ActualCauseResult {
    bool holds = false;
    std::optional<ActualCauseWitness> witness;
};

struct SufficientCauseResult {
    bool holds = false;
    std::string failed; // first failed condition: "SC1".."SC4", empty when holds
};

/// Naive responsibility 1/(1+k) as an exact rational.
struct Responsibility {
    long numerator = 0;
    long denominator = 1;
    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
    bool operator==(const Responsibility&) const = default;
};

/// But-for test: some alternative value of X falsifies phi. Returns false
/// (with a reason, when requested) if X=x or phi fail to hold actually.
bool is_but_for_cause(const CausalModel& model, const Context& context,
                      const CandidateCause& candidate, const Formula& phi,
                      std::string* why_not = nullptr);

/// AC1-AC3 of the modified definition, by exhaustive search over contingency
/// sets (smallest first, then lexicographic in declaration order) and
/// alternative values. The returned witness is the first one found.
ActualCauseResult is_actual_cause(const CausalModel& model, const Context& context,
                                  const CandidateCause& candidate, const Formula& phi,
                                  const SearchBudget& budget = {});

/// SC1-SC4: actuality, overlap with some actual cause, sufficiency under
/// every context, and minimality. Reports the first failed condition.
SufficientCauseResult is_sufficient_cause(const CausalModel& model, const Context& context,
                                          const CandidateCause& candidate, const Formula& phi,
                                          const SearchBudget& budget = {});

// k is the least number of other-variable flips (modeled as interventions)
// that make the candidate a but-for cause; variables of phi are excluded
// from flipping unless allow_formula_vars is set.
Responsibility naive_responsibility(const CausalModel& model, const Context& context,
                                    const CandidateCause& candidate, const Formula& phi,
                                    const SearchBudget& budget = {},
                                    bool allow_formula_vars = false);

/// FactorVector for one event: occurrence from evaluation, the three cause
/// factors from the oracles on the singleton candidate at its actual value,
/// order copied from order_map. Narrative factors (focal, norm, intent)
/// default to false; they are not derivable from the model.
FactorVector derive_factors(const CausalModel& model, const Context& context,
                            const EventName& event, const Formula& phi,
                            const std::map<EventName, int>& order_map,
                            const SearchBudget& budget = {});

} // namespace ac
