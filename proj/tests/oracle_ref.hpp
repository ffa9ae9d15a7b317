// Independent reference checkers for the cause definitions, kept deliberately
// separate from the library's search machinery: bitmask enumeration instead
// of size-ordered combinations, and model surgery via intervened() instead of
// the pinned-evaluation fast path. Test-only.

#pragma once

#include "ac/oracles.hpp"
#include "ac/scm.hpp"

#include <vector>

namespace ref {

inline bool holds_actually(const ac::CausalModel& model, const ac::Context& ctx,
                           const ac::Assignment& conjuncts, const ac::Formula& phi) {
    ac::Assignment actual = model.evaluate(ctx);
    for (const auto& [name, value] : conjuncts) {
        if (actual.at(name) != value) return false;
    }
    return phi->eval(actual);
}

// AC1 + AC2 by direct enumeration of every (W, x') pair.
inline bool ac1_ac2(const ac::CausalModel& model, const ac::Context& ctx,
                    const ac::Assignment& conjuncts, const ac::Formula& phi) {
    if (!holds_actually(model, ctx, conjuncts, phi)) return false;
    ac::Assignment actual = model.evaluate(ctx);

    std::vector<ac::EventName> rest;
    for (const auto& v : model.endogenous()) {
        if (!conjuncts.count(v)) rest.push_back(v);
    }
    std::vector<ac::EventName> xvars;
    for (const auto& [name, value] : conjuncts) {
        (void)value;
        xvars.push_back(name);
    }

    const ac::Formula not_phi = ac::BoolExpr::negate(phi);
    for (std::size_t wmask = 0; wmask < (std::size_t(1) << rest.size()); ++wmask) {
        for (std::size_t amask = 0; amask < (std::size_t(1) << xvars.size()); ++amask) {
            ac::Intervention iv;
            bool differs = false;
            for (std::size_t j = 0; j < xvars.size(); ++j) {
                bool value = (amask >> j) & 1u;
                iv.settings[xvars[j]] = value;
                if (value != conjuncts.at(xvars[j])) differs = true;
            }
            if (!differs) continue;
            for (std::size_t j = 0; j < rest.size(); ++j) {
                if ((wmask >> j) & 1u) iv.settings[rest[j]] = actual.at(rest[j]);
            }
            ac::CausalModel cut = model.intervened(iv);
            if (not_phi->eval(cut.evaluate(ctx))) return true;
        }
    }
    return false;
}

inline bool is_actual_cause(const ac::CausalModel& model, const ac::Context& ctx,
                            const ac::CandidateCause& candidate, const ac::Formula& phi) {
    if (!ac1_ac2(model, ctx, candidate.conjuncts, phi)) return false;
    std::vector<std::pair<ac::EventName, bool>> items(candidate.conjuncts.begin(),
                                                      candidate.conjuncts.end());
    for (std::size_t mask = 1; mask + 1 < (std::size_t(1) << items.size()); ++mask) {
        ac::Assignment sub;
        for (std::size_t j = 0; j < items.size(); ++j) {
            if ((mask >> j) & 1u) sub.insert(items[j]);
        }
        if (ac1_ac2(model, ctx, sub, phi)) return false; // minimality broken
    }
    return true;
}

} // namespace ref
