#pragma once

#include "ac/oracles.hpp"
#include "ac/scm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ac {

/// Canonical two-cause models used by the oracle and judgment test batteries.
CausalModel overdetermination_model(); // Y := X1 | X2
CausalModel conjunctive_model();       // Y := X1 & X2
CausalModel preemption_model();        // SH := ST, BH := BT & !SH, BS := SH | BH

/// Seeded random recursive model with up to max_endogenous/max_exogenous
/// variables; equations are random boolean trees over earlier variables.
CausalModel random_recursive_model(std::uint64_t seed, int max_endogenous, int max_exogenous);

struct BatteryConfig {
    std::size_t models = 1000;
    int max_endogenous = 4;
    int max_exogenous = 3;
    std::uint64_t seed = 0;
    int parallelism = 1;
    SearchBudget budget;
};

struct Counterexample {
    std::string property;
    std::string detail;
    Json model;
    Json context;
};

struct BatteryReport {
    std::size_t models_checked = 0;
    std::size_t checks_run = 0;
    std::vector<Counterexample> violations;

    bool ok() const noexcept { return violations.empty(); }
    Json to_json() const;
    std::string to_text() const;
};

// Property battery over seeded random models plus the canonical cases:
// but-for implies actual cause, witness replay, pair minimality, factor
// consistency, sufficiency re-check, and judgment totality.
BatteryReport run_battery(const BatteryConfig& config);

} // namespace ac
