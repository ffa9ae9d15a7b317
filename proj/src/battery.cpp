#include "ac/battery.hpp"

#include "ac/error.hpp"
#include "ac/judge.hpp"

#include <random>
#include <sstream>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ac {

namespace {

CausalModel two_cause_model(const char* combiner) {
    std::vector<EventName> exo = {EventName("U1"), EventName("U2")};
    std::vector<EventName> endo = {EventName("X1"), EventName("X2"), EventName("Y")};
    std::map<EventName, ExprPtr> eqs;
    eqs[EventName("X1")] = parse_expr("U1");
    eqs[EventName("X2")] = parse_expr("U2");
    eqs[EventName("Y")] = parse_expr(combiner);
    return CausalModel(std::move(exo), std::move(endo), std::move(eqs));
}

} // namespace

CausalModel overdetermination_model() {
    return two_cause_model("X1 | X2");
}

CausalModel conjunctive_model() {
    return two_cause_model("X1 & X2");
}

CausalModel preemption_model() {
    std::vector<EventName> exo = {EventName("UST"), EventName("UBT")};
    std::vector<EventName> endo = {EventName("ST"), EventName("BT"), EventName("SH"),
                                   EventName("BH"), EventName("BS")};
    std::map<EventName, ExprPtr> eqs;
    eqs[EventName("ST")] = parse_expr("UST");
    eqs[EventName("BT")] = parse_expr("UBT");
    eqs[EventName("SH")] = parse_expr("ST");
    eqs[EventName("BH")] = parse_expr("BT & !SH");
    eqs[EventName("BS")] = parse_expr("SH | BH");
    return CausalModel(std::move(exo), std::move(endo), std::move(eqs));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

ExprPtr random_tree(std::mt19937_64& rng, const std::vector<EventName>& parents, int depth) {
    std::uniform_int_distribution<int> pick_parent(0, static_cast<int>(parents.size()) - 1);
    if (depth <= 0 || std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        return BoolExpr::var(parents[static_cast<std::size_t>(pick_parent(rng))]);
    }
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0:
            return BoolExpr::negate(random_tree(rng, parents, depth - 1));
        case 1:
            return BoolExpr::conj(random_tree(rng, parents, depth - 1),
                                  random_tree(rng, parents, depth - 1));
        default:
            return BoolExpr::disj(random_tree(rng, parents, depth - 1),
                                  random_tree(rng, parents, depth - 1));
    }
}

} // namespace

CausalModel random_recursive_model(std::uint64_t seed, int max_endogenous, int max_exogenous) {
    std::mt19937_64 rng(splitmix64(seed));
    const int nu = std::uniform_int_distribution<int>(1, std::max(1, max_exogenous))(rng);
    const int nv = std::uniform_int_distribution<int>(1, std::max(1, max_endogenous))(rng);

    std::vector<EventName> exo, endo;
    for (int i = 0; i < nu; ++i) exo.emplace_back("U" + std::to_string(i));
    for (int i = 0; i < nv; ++i) endo.emplace_back("V" + std::to_string(i));

    std::map<EventName, ExprPtr> eqs;
    for (int i = 0; i < nv; ++i) {
        // Candidate parents: every exogenous variable and earlier endogenous
        // variables, so the dependency graph is acyclic by construction.
        std::vector<EventName> candidates = exo;
        for (int j = 0; j < i; ++j) candidates.push_back(endo[static_cast<std::size_t>(j)]);
        std::vector<EventName> parents;
        for (const auto& c : candidates) {
            if (parents.size() >= 3) break;
            if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) parents.push_back(c);
        }
        if (parents.empty()) {
            // Keep roots informative: tie them to some candidate rather than a
            // constant so contexts matter.
            parents.push_back(candidates[std::uniform_int_distribution<std::size_t>(
                0, candidates.size() - 1)(rng)]);
        }
        eqs[endo[static_cast<std::size_t>(i)]] = random_tree(rng, parents, 2);
    }
    return CausalModel(std::move(exo), std::move(endo), std::move(eqs));
}

namespace {

struct ModelCheckOutcome {
    std::size_t checks = 0;
    std::vector<Counterexample> violations;
};

Json context_json(const Context& ctx) {
    Json doc = Json::object();
    for (const auto& [name, value] : ctx.values) doc[name.str()] = value;
    return doc;
}

void report(ModelCheckOutcome& out, const CausalModel& model, const Context& ctx,
            const std::string& property, const std::string& detail) {
    Counterexample c;
    c.property = property;
    c.detail = detail;
    c.model = model.to_json();
    c.context = context_json(ctx);
    out.violations.push_back(std::move(c));
}

ModelCheckOutcome check_model(const CausalModel& model, const SearchBudget& budget) {
    ModelCheckOutcome out;
    const EventName sink = model.topological_order().back();
    std::map<EventName, int> order_map;
    for (std::size_t i = 0; i < model.topological_order().size(); ++i) {
        order_map[model.topological_order()[i]] = static_cast<int>(i);
    }

    for (const Context& ctx : enumerate_contexts(model, budget.max_exogenous)) {
        const Assignment actual = model.evaluate(ctx);
        const Formula phi_actual = BoolExpr::lit(sink, actual.at(sink));
        const Formula phi_true = BoolExpr::lit(sink, true);

        for (const Formula& phi : {phi_actual, phi_true}) {
            for (const EventName& event : model.endogenous()) {
                CandidateCause cand = CandidateCause::single(event, actual.at(event));
                const bool but_for = is_but_for_cause(model, ctx, cand, phi);
                ActualCauseResult acr = is_actual_cause(model, ctx, cand, phi, budget);
                ++out.checks;
                if (but_for && !acr.holds) {
                    report(out, model, ctx, "but-for-implies-actual-cause",
                           "candidate " + event.str() + "=" +
                               (actual.at(event) ? "1" : "0") + " against " + phi->to_string());
                }
                ++out.checks;
                if (acr.holds && !acr.witness.has_value()) {
                    report(out, model, ctx, "witness-present",
                           "actual cause without witness for " + event.str());
                }
            }
        }

        // Pair minimality: when a two-conjunct candidate passes, neither
        // singleton may itself be an actual cause.
        if (model.endogenous().size() >= 2) {
            const EventName& a = model.endogenous()[0];
            const EventName& b = model.endogenous()[1];
            CandidateCause pair;
            pair.conjuncts[a] = actual.at(a);
            pair.conjuncts[b] = actual.at(b);
            ActualCauseResult pair_result = is_actual_cause(model, ctx, pair, phi_actual, budget);
            ++out.checks;
            if (pair_result.holds) {
                for (const EventName& one : {a, b}) {
                    CandidateCause sub = CandidateCause::single(one, actual.at(one));
                    if (is_actual_cause(model, ctx, sub, phi_actual, budget).holds) {
                        report(out, model, ctx, "pair-minimality",
                               "pair holds although singleton " + one.str() + " is a cause");
                    }
                }
            }
        }

        // Factor derivation, consistency, sufficiency re-check, and judgment
        // totality over the non-sink events.
        CausalSetting setting;
        for (const EventName& event : model.endogenous()) {
            if (event == sink) continue;
            FactorVector f = derive_factors(model, ctx, event, phi_actual, order_map, budget);
            f.focal = true;
            ++out.checks;
            if (f.necessary && !f.halpern_pearl) {
                report(out, model, ctx, "factor-consistency",
                       "necessary without actual cause on " + event.str());
            }
            if (f.sufficient) {
                Intervention force;
                force.settings[event] = actual.at(event);
                for (const Context& other : enumerate_contexts(model, budget.max_exogenous)) {
                    ++out.checks;
                    if (!satisfies(model, other, force, phi_actual)) {
                        report(out, model, ctx, "sufficiency-recheck",
                               "sufficient flag fails under some context for " + event.str());
                        break;
                    }
                }
            }
            setting.add_event(event, f);
        }
        if (!setting.events().empty()) {
            OutcomeRecord rec;
            rec.occur = actual.at(sink);
            rec.order = order_map.at(sink);
            setting.set_outcome(sink, rec);
            ++out.checks;
            try {
                Judgment judged = judge_query(setting, ResolverPolicy{});
                (void)judged;
            } catch (const Error& e) {
                report(out, model, ctx, "judgment-totality", e.what());
            }
        }
    }
    return out;
}

ModelCheckOutcome check_canonical_cases(const SearchBudget& budget) {
    ModelCheckOutcome out;
    auto expect = [&](bool condition, const CausalModel& model, const Context& ctx,
                      const std::string& property, const std::string& detail) {
        ++out.checks;
        if (!condition) report(out, model, ctx, property, detail);
    };

    {
        CausalModel model = overdetermination_model();
        Context ctx;
        ctx.values[EventName("U1")] = true;
        ctx.values[EventName("U2")] = true;
        Formula phi = BoolExpr::lit(EventName("Y"), true);
        CandidateCause x1 = CandidateCause::single(EventName("X1"), true);
        CandidateCause both;
        both.conjuncts[EventName("X1")] = true;
        both.conjuncts[EventName("X2")] = true;

        expect(!is_actual_cause(model, ctx, x1, phi, budget).holds, model, ctx,
               "overdetermination", "singleton must not be an actual cause");
        expect(is_sufficient_cause(model, ctx, x1, phi, budget).holds, model, ctx,
               "overdetermination", "singleton must be a sufficient cause");
        expect(naive_responsibility(model, ctx, x1, phi, budget) == Responsibility{1, 2}, model,
               ctx, "overdetermination", "singleton responsibility must be 1/2");
        expect(is_actual_cause(model, ctx, both, phi, budget).holds, model, ctx,
               "overdetermination", "the pair must be an actual cause");
        expect(!is_but_for_cause(model, ctx, x1, phi), model, ctx, "overdetermination",
               "singleton must not be a but-for cause");
    }

    {
        CausalModel model = conjunctive_model();
        Context ctx;
        ctx.values[EventName("U1")] = true;
        ctx.values[EventName("U2")] = true;
        Formula phi = BoolExpr::lit(EventName("Y"), true);
        CandidateCause x1 = CandidateCause::single(EventName("X1"), true);
        expect(is_but_for_cause(model, ctx, x1, phi), model, ctx, "conjunction",
               "conjunct must be a but-for cause");
        expect(naive_responsibility(model, ctx, x1, phi, budget) == Responsibility{1, 1}, model,
               ctx, "conjunction", "conjunct responsibility must be 1");
        expect(!is_sufficient_cause(model, ctx, x1, phi, budget).holds, model, ctx, "conjunction",
               "conjunct must not be sufficient");
    }

    {
        CausalModel model = preemption_model();
        Context ctx;
        ctx.values[EventName("UST")] = true;
        ctx.values[EventName("UBT")] = true;
        Formula phi = BoolExpr::lit(EventName("BS"), true);
        CandidateCause early = CandidateCause::single(EventName("ST"), true);
        CandidateCause late = CandidateCause::single(EventName("BT"), true);

        ActualCauseResult early_result = is_actual_cause(model, ctx, early, phi, budget);
        expect(early_result.holds, model, ctx, "preemption", "early thrower must be a cause");
        Assignment expected_contingency;
        expected_contingency[EventName("BH")] = false;
        expect(early_result.witness.has_value() &&
                   early_result.witness->contingency() == expected_contingency,
               model, ctx, "preemption", "early witness must freeze BH at its actual value");
        expect(!is_actual_cause(model, ctx, late, phi, budget).holds, model, ctx, "preemption",
               "late thrower must not be a cause");

        std::map<EventName, int> order_map;
        for (const EventName& v : model.endogenous()) order_map[v] = 0;
        order_map[EventName("ST")] = 0;
        order_map[EventName("BT")] = 1;
        CausalSetting setting;
        FactorVector st = derive_factors(model, ctx, EventName("ST"), phi, order_map, budget);
        FactorVector bt = derive_factors(model, ctx, EventName("BT"), phi, order_map, budget);
        st.focal = bt.focal = true;
        setting.add_event(EventName("ST"), st);
        setting.add_event(EventName("BT"), bt);
        setting.set_outcome(EventName("BS"), {true, 2});
        expect(judge_event(setting, EventName("ST")).answer == YesNo::Yes, model, ctx,
               "preemption", "early thrower must be judged a cause");
        expect(judge_event(setting, EventName("BT")).answer == YesNo::No, model, ctx,
               "preemption", "late thrower must be judged a non-cause");
    }

    return out;
}

} // namespace

BatteryReport run_battery(const BatteryConfig& config) {
    BatteryReport reportv;
    std::vector<ModelCheckOutcome> outcomes(config.models);

    const int degree = std::max(1, config.parallelism);
    if (degree == 1) {
        for (std::size_t i = 0; i < config.models; ++i) {
            CausalModel model = random_recursive_model(splitmix64(config.seed ^ i),
                                                       config.max_endogenous, config.max_exogenous);
            outcomes[i] = check_model(model, config.budget);
        }
    } else {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) num_threads(degree)
        for (long long i = 0; i < static_cast<long long>(config.models); ++i) {
            CausalModel model =
                random_recursive_model(splitmix64(config.seed ^ static_cast<std::uint64_t>(i)),
                                       config.max_endogenous, config.max_exogenous);
            outcomes[static_cast<std::size_t>(i)] = check_model(model, config.budget);
        }
#else
        for (std::size_t i = 0; i < config.models; ++i) {
            CausalModel model = random_recursive_model(splitmix64(config.seed ^ i),
                                                       config.max_endogenous, config.max_exogenous);
            outcomes[i] = check_model(model, config.budget);
        }
#endif
    }

    for (auto& outcome : outcomes) {
        ++reportv.models_checked;
        reportv.checks_run += outcome.checks;
        for (auto& v : outcome.violations) reportv.violations.push_back(std::move(v));
    }

    ModelCheckOutcome canonical = check_canonical_cases(config.budget);
    reportv.checks_run += canonical.checks;
    for (auto& v : canonical.violations) reportv.violations.push_back(std::move(v));
    return reportv;
}

Json BatteryReport::to_json() const {
    Json doc;
    doc["models_checked"] = models_checked;
    doc["checks_run"] = checks_run;
    doc["violations"] = Json::array();
    for (const auto& v : violations) {
        Json one;
        one["property"] = v.property;
        one["detail"] = v.detail;
        one["model"] = v.model;
        one["context"] = v.context;
        doc["violations"].push_back(std::move(one));
    }
    return doc;
}

std::string BatteryReport::to_text() const {
    std::ostringstream out;
    out << "models checked: " << models_checked << "\n"
        << "checks run:     " << checks_run << "\n"
        << "violations:     " << violations.size() << "\n";
    for (const auto& v : violations) {
        out << "  [" << v.property << "] " << v.detail << "\n"
            << "    model:   " << v.model.dump() << "\n"
            << "    context: " << v.context.dump() << "\n";
    }
    return out.str();
}

} // namespace ac
