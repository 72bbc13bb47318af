#include "nwp/core.hpp"

#include <cmath>

#include "nwp/errors.hpp"

namespace nwp {

Label label_from_int(int v) {
    if (v == 0) return Label::negative;
    if (v == 1) return Label::positive;
    throw InvalidInputError("label must be 0 or 1, got " + std::to_string(v));
}

void validate(const FeatureVector& fv) {
    if (fv.values.size() != fv.names.size())
        throw InvalidInputError("feature values/names length mismatch: " +
                                std::to_string(fv.values.size()) + " vs " +
                                std::to_string(fv.names.size()));
    for (std::size_t i = 0; i < fv.values.size(); ++i)
        if (!std::isfinite(fv.values[i]))
            throw InvalidInputError("non-finite feature value at '" + fv.names[i] + "'");
}

void validate(const UtilityTable& table) {
    if (!(table.utility_floor > 0.0))
        throw InvalidInputError("utility_floor must be positive");
    const double fractions[] = {table.interest_rate, table.principal_loss_fraction,
                                table.individual_gain_repay, table.individual_loss_default,
                                table.rejection_opportunity_cost};
    for (double f : fractions)
        if (!(f >= 0.0)) throw InvalidInputError("utility table fractions must be >= 0");
    if (!std::isfinite(table.payoff_shift))
        throw InvalidInputError("payoff_shift must be finite");
}

nlohmann::json to_json(const UtilityTable& t) {
    return nlohmann::json{{"interest_rate", t.interest_rate},
                          {"principal_loss_fraction", t.principal_loss_fraction},
                          {"individual_gain_repay", t.individual_gain_repay},
                          {"individual_loss_default", t.individual_loss_default},
                          {"rejection_opportunity_cost", t.rejection_opportunity_cost},
                          {"payoff_shift", t.payoff_shift},
                          {"utility_floor", t.utility_floor}};
}

UtilityTable utility_table_from_json(const nlohmann::json& j) {
    UtilityTable t;
    t.interest_rate = j.value("interest_rate", t.interest_rate);
    t.principal_loss_fraction = j.value("principal_loss_fraction", t.principal_loss_fraction);
    t.individual_gain_repay = j.value("individual_gain_repay", t.individual_gain_repay);
    t.individual_loss_default = j.value("individual_loss_default", t.individual_loss_default);
    t.rejection_opportunity_cost =
        j.value("rejection_opportunity_cost", t.rejection_opportunity_cost);
    t.payoff_shift = j.value("payoff_shift", t.payoff_shift);
    t.utility_floor = j.value("utility_floor", t.utility_floor);
    validate(t);
    return t;
}

Scenario scenario_of(Label decision, Label outcome) {
    if (decision == Label::positive)
        return outcome == Label::positive ? Scenario::s11 : Scenario::s10;
    return outcome == Label::positive ? Scenario::s01 : Scenario::s00;
}

double scenario_payoff(Scenario scenario, double principal, const UtilityTable& table,
                       Party party) {
    if (!(principal > 0.0) || !std::isfinite(principal))
        throw InvalidInputError("principal must be positive and finite");
    if (party == Party::institution) {
        switch (scenario) {
            case Scenario::s11: return table.interest_rate * principal;
            case Scenario::s10: return -table.principal_loss_fraction * principal;
            case Scenario::s01:
            case Scenario::s00: return 0.0;
        }
    } else {
        switch (scenario) {
            case Scenario::s11: return table.individual_gain_repay * principal;
            case Scenario::s10: return -table.individual_loss_default * principal;
            case Scenario::s01: return -table.rejection_opportunity_cost * principal;
            case Scenario::s00: return 0.0;
        }
    }
    throw InvalidInputError("unknown scenario");
}

double to_positive_utility(double payoff, const UtilityTable& table) {
    if (!std::isfinite(payoff)) throw InvalidInputError("payoff must be finite");
    return std::max(payoff + table.payoff_shift, table.utility_floor);
}

double log_nwp(std::span<const double> weights, std::span<const double> utilities) {
    if (weights.size() != utilities.size())
        throw InvalidInputError("log_nwp: weights/utilities length mismatch: " +
                                std::to_string(weights.size()) + " vs " +
                                std::to_string(utilities.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        // Zero weights annihilate the product; treat them as configuration bugs.
        if (!(weights[i] > 0.0))
            throw InvalidInputError("log_nwp: weight at index " + std::to_string(i) +
                                    " must be > 0");
        if (!(utilities[i] > 0.0))
            throw InvalidInputError("log_nwp: utility at index " + std::to_string(i) +
                                    " must be > 0");
        sum += std::log(weights[i]) + std::log(utilities[i]);
    }
    return sum;
}

ScenarioNwpMatrix scenario_nwp_matrix(const IndividualState& individual,
                                      const InstitutionState& institution,
                                      double rest_log_nwp, double principal,
                                      const UtilityTable& table) {
    if (!std::isfinite(rest_log_nwp))
        throw InvalidInputError("rest_log_nwp must be finite");
    if (!(individual.weight > 0.0))
        throw InvalidInputError("individual weight must be > 0");
    if (!(institution.weight > 0.0))
        throw InvalidInputError("institution weight must be > 0");

    auto entry = [&](Scenario s) {
        double u_inst =
            to_positive_utility(scenario_payoff(s, principal, table, Party::institution), table);
        double u_ind =
            to_positive_utility(scenario_payoff(s, principal, table, Party::individual), table);
        return rest_log_nwp + std::log(institution.weight) + std::log(u_inst) +
               std::log(individual.weight) + std::log(u_ind);
    };
    ScenarioNwpMatrix m;
    m.nwp_11 = entry(Scenario::s11);
    m.nwp_10 = entry(Scenario::s10);
    m.nwp_01 = entry(Scenario::s01);
    m.nwp_00 = entry(Scenario::s00);
    return m;
}

DecisionUtility decision_utility(const ScenarioNwpMatrix& matrix) {
    const double entries[] = {matrix.nwp_11, matrix.nwp_10, matrix.nwp_01, matrix.nwp_00};
    for (double e : entries)
        if (!std::isfinite(e)) throw InvalidInputError("scenario matrix entries must be finite");
    DecisionUtility u;
    u.delta_nwp_1 = matrix.nwp_11 - matrix.nwp_10;
    u.delta_nwp_0 = matrix.nwp_01 - matrix.nwp_00;
    u.u_decision = u.delta_nwp_1 - u.delta_nwp_0;
    return u;
}

}  // namespace nwp
