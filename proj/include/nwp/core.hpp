#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace nwp {

// Binary decision/outcome. In the lending scenario: approve/repay = positive,
// deny/default = negative.
enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline int to_int(Label l) { return l == Label::positive ? 1 : 0; }
Label label_from_int(int v);

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> names;
};

// Checks equal lengths and finite values; throws InvalidInputError.
void validate(const FeatureVector& fv);

struct LedgerEntry {
    int epoch = 0;
    Label decision = Label::negative;
    Label outcome = Label::negative;
    double payoff = 0.0;
};

struct IndividualState {
    std::string id;
    FeatureVector features;
    double income = 0.0;   // simulation-normalized currency
    double weight = 0.0;   // w_i, non-negative
    std::string group;     // protected attribute value
    std::vector<LedgerEntry> outcome_ledger;
};

struct InstitutionState {
    double weight = 0.5;       // w_inst
    double budget = 0.0;       // B
    double outstanding = 0.0;  // currently loaned, 0 <= outstanding <= budget
    double profit = 0.0;       // cumulative, signed
};

// Payoff fractions for the four (decision, outcome) scenarios plus the
// affine shift/floor that maps signed payoffs to positive utilities.
struct UtilityTable {
    double interest_rate = 0.1;
    double principal_loss_fraction = 1.0;
    double individual_gain_repay = 0.2;
    double individual_loss_default = 0.5;
    double rejection_opportunity_cost = 0.05;
    double payoff_shift = 1000.0;
    double utility_floor = 1e-6;
};

void validate(const UtilityTable& table);
nlohmann::json to_json(const UtilityTable& table);
UtilityTable utility_table_from_json(const nlohmann::json& j);

// (decision, outcome) pairs: 11 loan repaid, 10 loan defaulted,
// 01 denied but would have repaid, 00 denied and would have defaulted.
enum class Scenario { s11, s10, s01, s00 };

Scenario scenario_of(Label decision, Label outcome);

enum class Party { institution, individual };

// Log-domain Nash welfare of the four counterfactual scenarios for one decision.
struct ScenarioNwpMatrix {
    double nwp_11 = 0.0;
    double nwp_10 = 0.0;
    double nwp_01 = 0.0;
    double nwp_00 = 0.0;
};

struct DecisionUtility {
    double delta_nwp_1 = 0.0;  // nwp_11 - nwp_10
    double delta_nwp_0 = 0.0;  // nwp_01 - nwp_00
    double u_decision = 0.0;   // delta_nwp_1 - delta_nwp_0
};

// Signed payoff of `party` in `scenario` for a loan of `principal`.
double scenario_payoff(Scenario scenario, double principal, const UtilityTable& table,
                       Party party);

// max(payoff + payoff_shift, utility_floor); strictly positive, monotone.
double to_positive_utility(double payoff, const UtilityTable& table);

// Sum of ln(w_i) + ln(u_i). exp() of the result is the Nash welfare product;
// the sum form is the only one that survives populations of 100+.
double log_nwp(std::span<const double> weights, std::span<const double> utilities);

// Four-scenario log-NWP for (individual, institution) with the rest of
// society's log welfare held fixed.
ScenarioNwpMatrix scenario_nwp_matrix(const IndividualState& individual,
                                      const InstitutionState& institution,
                                      double rest_log_nwp, double principal,
                                      const UtilityTable& table);

DecisionUtility decision_utility(const ScenarioNwpMatrix& matrix);

}  // namespace nwp
