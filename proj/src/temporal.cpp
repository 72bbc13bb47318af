#include "nwp/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "nwp/errors.hpp"
#include "nwp/io.hpp"

namespace nwp {

std::string to_string(PolicyMode mode) {
    switch (mode) {
        case PolicyMode::welfare: return "welfare";
        case PolicyMode::fairness: return "fairness";
        case PolicyMode::mixed: return "mixed";
    }
    return "welfare";
}

PolicyMode policy_mode_from_string(const std::string& s) {
    if (s == "welfare") return PolicyMode::welfare;
    if (s == "fairness") return PolicyMode::fairness;
    if (s == "mixed") return PolicyMode::mixed;
    throw ConfigError("unknown policy mode '" + s + "'");
}

void validate(const PolicyGoal& goal) {
    if (!(goal.theta >= 0.0 && goal.theta <= 1.0))
        throw InvalidInputError("policy: theta must lie in [0, 1]");
    if (!(goal.eta_welfare >= 0.0) || !(goal.eta_fairness >= 0.0))
        throw InvalidInputError("policy: step sizes must be >= 0");
}

nlohmann::json to_json(const PolicyGoal& g) {
    return nlohmann::json{{"mode", to_string(g.mode)},
                          {"theta", g.theta},
                          {"eta_welfare", g.eta_welfare},
                          {"eta_fairness", g.eta_fairness}};
}

PolicyGoal policy_goal_from_json(const nlohmann::json& j) {
    PolicyGoal g;
    if (j.contains("mode")) g.mode = policy_mode_from_string(j.at("mode").get<std::string>());
    g.theta = j.value("theta", g.theta);
    g.eta_welfare = j.value("eta_welfare", g.eta_welfare);
    g.eta_fairness = j.value("eta_fairness", g.eta_fairness);
    validate(g);
    return g;
}

void validate(const SimulationConfig& c) {
    if (c.population_size == 0) throw ConfigError("config: population_size must be > 0");
    if (c.epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (!(c.income_lo > 0.0) || !(c.income_lo < c.income_hi))
        throw ConfigError("config: need 0 < income_lo < income_hi");
    if (!(c.institution_weight > 0.0))
        throw ConfigError("config: institution_weight must be > 0");
    if (!(c.institution_budget > 0.0))
        throw ConfigError("config: institution_budget must be > 0");
    if (!(c.request_spread > 0.0) || !(c.outcome_spread > 0.0))
        throw ConfigError("config: spreads must be > 0");
    validate(c.classifier);
    validate(c.modulation);
    validate(c.policy);
    validate(c.utility_table);
}

nlohmann::json to_json(const SimulationConfig& c) {
    return nlohmann::json{{"population_size", c.population_size},
                          {"epochs", c.epochs},
                          {"income_lo", c.income_lo},
                          {"income_hi", c.income_hi},
                          {"institution_weight", c.institution_weight},
                          {"institution_budget", c.institution_budget},
                          {"request_spread", c.request_spread},
                          {"outcome_spread", c.outcome_spread},
                          {"seed", c.seed},
                          {"retrain_each_epoch", c.retrain_each_epoch},
                          {"classifier", to_json(c.classifier)},
                          {"modulation", to_json(c.modulation)},
                          {"policy", to_json(c.policy)},
                          {"utility_table", to_json(c.utility_table)}};
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j) {
    SimulationConfig c;
    try {
        c.population_size = j.value("population_size", c.population_size);
        c.epochs = j.value("epochs", c.epochs);
        c.income_lo = j.value("income_lo", c.income_lo);
        c.income_hi = j.value("income_hi", c.income_hi);
        c.institution_weight = j.value("institution_weight", c.institution_weight);
        c.institution_budget = j.value("institution_budget", c.institution_budget);
        c.request_spread = j.value("request_spread", c.request_spread);
        c.outcome_spread = j.value("outcome_spread", c.outcome_spread);
        c.seed = j.value("seed", c.seed);
        c.retrain_each_epoch = j.value("retrain_each_epoch", c.retrain_each_epoch);
        if (j.contains("classifier")) c.classifier = classifier_config_from_json(j.at("classifier"));
        if (j.contains("modulation")) c.modulation = modulation_config_from_json(j.at("modulation"));
        if (j.contains("policy")) c.policy = policy_goal_from_json(j.at("policy"));
        if (j.contains("utility_table")) {
            c.utility_table = utility_table_from_json(j.at("utility_table"));
            if (!j.at("utility_table").contains("payoff_shift"))
                c.utility_table.payoff_shift = c.income_hi;
        } else {
            c.utility_table.payoff_shift = c.income_hi;
        }
        validate(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad simulation config: ") + e.what());
    }
    return c;
}

std::string to_string(DecisionMethod method) {
    switch (method) {
        case DecisionMethod::nwp: return "nwp";
        case DecisionMethod::ceo: return "ceo";
        case DecisionMethod::none: return "none";
    }
    return "nwp";
}

DecisionMethod method_from_string(const std::string& s) {
    if (s == "nwp") return DecisionMethod::nwp;
    if (s == "ceo") return DecisionMethod::ceo;
    if (s == "none") return DecisionMethod::none;
    throw ConfigError("unknown method '" + s + "' (expected nwp, ceo, or none)");
}

CeoContext fit_ceo(const TrainedClassifier& model, const PopulationSample& train,
                   const CostWeights& weights) {
    std::vector<double> raws;
    raws.reserve(train.individuals.size());
    for (const auto& ind : train.individuals) raws.push_back(margin(model, ind.features).raw);

    CeoContext ctx;
    ctx.calibrator = fit_calibrator(raws, train.labels);

    std::map<std::string, GroupScores> groups;
    for (std::size_t i = 0; i < train.individuals.size(); ++i) {
        GroupScores& g = groups[train.individuals[i].group];
        g.group = train.individuals[i].group;
        g.scores.push_back(ctx.calibrator(raws[i]));
        g.labels.push_back(train.labels[i]);
    }
    if (groups.size() != 2)
        throw DegenerateDataError("fit_ceo: expected exactly 2 groups, got " +
                                  std::to_string(groups.size()));
    auto it = groups.begin();
    const GroupScores& a = it->second;
    const GroupScores& b = std::next(it)->second;
    ctx.policy = fit_mixing(a, b, weights);
    return ctx;
}

void initial_weights(std::vector<IndividualState>& population, const SimulationConfig& config) {
    for (auto& ind : population) {
        if (!(ind.income >= config.income_lo && ind.income <= config.income_hi))
            throw InvalidInputError("initial_weights: income " + fmt_double(ind.income) +
                                    " of '" + ind.id + "' outside [" +
                                    fmt_double(config.income_lo) + ", " +
                                    fmt_double(config.income_hi) + "]");
        ind.weight = ind.income / config.income_hi;
    }
}

double sample_request(double income, double spread, Rng& rng) {
    if (!(income > 0.0)) throw InvalidInputError("sample_request: income must be > 0");
    double draw;
    do {
        draw = rng.normal(income, spread * income);
    } while (!(draw > 0.0));
    return draw;
}

Label sample_outcome(double raw_prediction, double spread, Rng& rng) {
    if (!std::isfinite(raw_prediction) || !std::isfinite(spread))
        throw InvalidInputError("sample_outcome: non-finite input");
    return rng.normal(raw_prediction, spread) > 0.0 ? Label::positive : Label::negative;
}

void apply_rewards(IndividualState& individual, InstitutionState& institution, Label decision,
                   Label outcome, double principal, const UtilityTable& table, double income_lo,
                   double income_hi, int epoch) {
    Scenario s = scenario_of(decision, outcome);
    double ind_payoff = scenario_payoff(s, principal, table, Party::individual);
    double inst_payoff = scenario_payoff(s, principal, table, Party::institution);

    individual.income = std::clamp(individual.income + ind_payoff, income_lo, income_hi);
    individual.outcome_ledger.push_back({epoch, decision, outcome, ind_payoff});
    institution.profit += inst_payoff;
}

std::vector<double> welfare_uplift(std::span<const double> weights, double eta) {
    if (!(eta >= 0.0)) throw InvalidInputError("welfare_uplift: eta must be >= 0");
    if (weights.empty()) return {};
    double mean = 0.0;
    for (double w : weights) mean += w;
    mean /= static_cast<double>(weights.size());
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w += eta * std::max(0.0, mean - w);
    return out;
}

void fairness_adjust(std::vector<double>& weights, std::span<const std::string> groups,
                     const ErrorRates& error, double eta) {
    if (weights.size() != groups.size())
        throw InvalidInputError("fairness_adjust: weights/groups length mismatch");
    std::set<std::string> warned;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        auto it = error.per_group.find(groups[i]);
        if (it == error.per_group.end()) {
            if (warned.insert(groups[i]).second)
                std::cerr << "warning: group '" << groups[i]
                          << "' has no error record this epoch; correction skipped\n";
            continue;
        }
        weights[i] *= 1.0 + eta * (it->second.combined - error.combined);
    }
}

void tau_update(std::vector<IndividualState>& population, const EpochRecord& record,
                const PolicyGoal& policy, double income_hi) {
    validate(policy);
    // Stage (a): weights stay a function of income.
    for (auto& ind : population) ind.weight = ind.income / income_hi;

    double eta_b = 0.0, eta_c = 0.0;
    switch (policy.mode) {
        case PolicyMode::welfare: eta_b = policy.eta_welfare; break;
        case PolicyMode::fairness: eta_c = policy.eta_fairness; break;
        case PolicyMode::mixed:
            eta_b = (1.0 - policy.theta) * policy.eta_welfare;
            eta_c = policy.theta * policy.eta_fairness;
            break;
    }

    std::vector<double> weights;
    weights.reserve(population.size());
    for (const auto& ind : population) weights.push_back(ind.weight);

    if (eta_b > 0.0) weights = welfare_uplift(weights, eta_b);
    if (eta_c > 0.0) {
        std::vector<std::string> groups;
        groups.reserve(population.size());
        for (const auto& ind : population) groups.push_back(ind.group);
        fairness_adjust(weights, groups, record.error, eta_c);
    }
    for (std::size_t i = 0; i < population.size(); ++i)
        population[i].weight = std::clamp(weights[i], 1e-6, 1.0);
}

namespace {

DecisionRecord decide(const IndividualState& ind, const MarginDistance& m,
                      const DecisionUtility& u, const SimulationConfig& config,
                      DecisionMethod method, const CeoContext* ceo, Rng& ceo_rng) {
    DecisionRecord rec;
    rec.id = ind.id;
    rec.group = ind.group;
    rec.u_decision = u.u_decision;
    rec.raw = m.raw;
    rec.normalized = m.normalized;
    switch (method) {
        case DecisionMethod::nwp: {
            ModulatedScore sc = modulate(m, u, config.modulation);
            rec.adjustment = sc.adjustment;
            rec.modulated = sc.modulated;
            rec.decision = sc.decision;
            break;
        }
        case DecisionMethod::none: {
            rec.adjustment = 0.0;
            rec.modulated = m.raw;
            rec.decision = m.raw > 0.0 ? Label::positive : Label::negative;
            break;
        }
        case DecisionMethod::ceo: {
            if (ceo == nullptr) throw InvalidInputError("ceo method without fitted context");
            double p = ceo->calibrator(m.raw);
            double mixed = apply_mixing(p, ind.group, ceo->policy, ceo_rng);
            rec.adjustment = mixed - p;
            rec.modulated = mixed;
            rec.decision = mixed > 0.5 ? Label::positive : Label::negative;
            break;
        }
    }
    return rec;
}

double epoch_log_nwp(const std::vector<IndividualState>& population,
                     const InstitutionState& institution, double epoch_profit,
                     const UtilityTable& table) {
    std::vector<double> weights, utilities;
    weights.reserve(population.size() + 1);
    utilities.reserve(population.size() + 1);
    weights.push_back(institution.weight);
    utilities.push_back(to_positive_utility(epoch_profit, table));
    for (const auto& ind : population) {
        weights.push_back(ind.weight);
        double payoff =
            ind.outcome_ledger.empty() ? 0.0 : ind.outcome_ledger.back().payoff;
        utilities.push_back(to_positive_utility(payoff, table));
    }
    return log_nwp(weights, utilities);
}

}  // namespace

EpochRecord run_epoch(SimulationState& state, const SimulationConfig& config, int epoch,
                      DecisionMethod method, const CeoContext* ceo, Rng& rng, Rng& ceo_rng) {
    auto& population = state.population;
    auto& institution = state.institution;

    institution.outstanding = 0.0;  // all of last epoch's loans have resolved
    const double profit_before = institution.profit;

    EpochRecord record;
    record.epoch = epoch;
    record.weights_snapshot.reserve(population.size());
    for (const auto& ind : population) record.weights_snapshot.push_back(ind.weight);

    // Rest-of-society log welfare at status quo, maintained by subtraction
    // per individual. u_decision is invariant to it; the matrix is not.
    const double u0 = to_positive_utility(0.0, config.utility_table);
    double sum_log_w = 0.0;
    for (const auto& ind : population) {
        if (!(ind.weight > 0.0))
            throw InvalidInputError("run_epoch: non-positive weight for '" + ind.id + "'");
        sum_log_w += std::log(ind.weight);
    }
    const double n_rest = static_cast<double>(population.size()) - 1.0;

    std::vector<Label> decisions, outcomes;
    std::vector<std::string> groups;
    for (auto& ind : population) {
        double request = sample_request(ind.income, config.request_spread, rng);
        double rest = sum_log_w - std::log(ind.weight) + n_rest * std::log(u0);
        ScenarioNwpMatrix matrix =
            scenario_nwp_matrix(ind, institution, rest, request, config.utility_table);
        DecisionUtility u = decision_utility(matrix);
        MarginDistance m = margin(state.model, ind.features);

        DecisionRecord rec = decide(ind, m, u, config, method, ceo, ceo_rng);
        rec.request = request;
        if (rec.decision == Label::positive &&
            institution.outstanding + request > institution.budget) {
            rec.decision = Label::negative;
            rec.budget_forced = true;
        }
        if (rec.decision == Label::positive) institution.outstanding += request;

        rec.outcome = sample_outcome(m.raw, config.outcome_spread, rng);
        apply_rewards(ind, institution, rec.decision, rec.outcome, request,
                      config.utility_table, config.income_lo, config.income_hi, epoch);

        decisions.push_back(rec.decision);
        outcomes.push_back(rec.outcome);
        groups.push_back(ind.group);
        record.decisions.push_back(std::move(rec));
    }

    record.error = error_rates(decisions, outcomes, groups);
    record.log_nwp =
        epoch_log_nwp(population, institution, institution.profit - profit_before,
                      config.utility_table);
    tau_update(population, record, config.policy, config.income_hi);
    return record;
}

SimulationTrace run_simulation(const SimulationConfig& config, const PopulationSample& sample,
                               DecisionMethod method) {
    validate(config);
    if (sample.individuals.size() < config.population_size)
        throw DegenerateDataError("run_simulation: dataset yields " +
                                  std::to_string(sample.individuals.size()) +
                                  " individuals, need " +
                                  std::to_string(config.population_size));

    SimulationState state;
    state.population.assign(sample.individuals.begin(),
                            sample.individuals.begin() +
                                static_cast<std::ptrdiff_t>(config.population_size));
    state.institution.weight = config.institution_weight;
    state.institution.budget = config.institution_budget;
    initial_weights(state.population, config);

    std::vector<LabeledPoint> training;
    training.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i)
        training.push_back({state.population[i].features, sample.labels[i]});
    state.model = train(training, config.classifier);

    CeoContext ceo;
    if (method == DecisionMethod::ceo) {
        PopulationSample train_view = sample;
        train_view.individuals.resize(config.population_size);
        train_view.labels.resize(config.population_size);
        ceo = fit_ceo(state.model, train_view);
    }

    SimulationTrace trace;
    trace.config = config;
    trace.method = method;
    for (const auto& ind : state.population) trace.initial_weights.push_back(ind.weight);

    Rng rng(derive_seed(config.seed, "sim"));
    Rng ceo_rng(derive_seed(config.seed, "ceo-mix"));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.retrain_each_epoch && epoch > 1) {
            // Refit on the previous epoch's realized outcomes.
            const EpochRecord& prev = trace.epochs.back();
            std::vector<LabeledPoint> refit;
            refit.reserve(state.population.size());
            for (std::size_t i = 0; i < state.population.size(); ++i)
                refit.push_back({state.population[i].features, prev.decisions[i].outcome});
            try {
                state.model = train(refit, config.classifier);
            } catch (const DegenerateDataError&) {
                std::cerr << "warning: epoch " << epoch
                          << ": single-class outcomes, keeping previous model\n";
            }
        }
        trace.epochs.push_back(
            run_epoch(state, config, epoch, method, method == DecisionMethod::ceo ? &ceo : nullptr,
                      rng, ceo_rng));
    }
    return trace;
}

SupervisedEval evaluate_supervised(const SimulationConfig& config,
                                   const TrainedClassifier& model,
                                   const PopulationSample& test, DecisionMethod method,
                                   const CeoContext* ceo, Rng& ceo_rng) {
    validate(config);
    if (test.individuals.empty())
        throw DegenerateDataError("evaluate_supervised: empty test sample");

    std::vector<IndividualState> population = test.individuals;
    initial_weights(population, config);
    InstitutionState institution;
    institution.weight = config.institution_weight;
    institution.budget = config.institution_budget;

    const double u0 = to_positive_utility(0.0, config.utility_table);
    double sum_log_w = 0.0;
    for (const auto& ind : population) sum_log_w += std::log(ind.weight);
    const double n_rest = static_cast<double>(population.size()) - 1.0;

    SupervisedEval eval;
    std::vector<Label> decisions, outcomes;
    std::vector<std::string> groups;
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& ind = population[i];
        const double stake = ind.income;
        double rest = sum_log_w - std::log(ind.weight) + n_rest * std::log(u0);
        ScenarioNwpMatrix matrix =
            scenario_nwp_matrix(ind, institution, rest, stake, config.utility_table);
        DecisionUtility u = decision_utility(matrix);
        MarginDistance m = margin(model, ind.features);

        DecisionRecord rec = decide(ind, m, u, config, method, ceo, ceo_rng);
        rec.request = stake;
        if (rec.decision == Label::positive &&
            institution.outstanding + stake > institution.budget) {
            rec.decision = Label::negative;
            rec.budget_forced = true;
        }
        if (rec.decision == Label::positive) institution.outstanding += stake;
        rec.outcome = test.labels[i];

        decisions.push_back(rec.decision);
        outcomes.push_back(rec.outcome);
        groups.push_back(ind.group);
        eval.decisions.push_back(std::move(rec));
    }
    eval.error = error_rates(decisions, outcomes, groups);
    return eval;
}

WelfarePoint welfare_point(const EpochRecord& record) {
    WelfarePoint p;
    p.log_nwp = record.log_nwp;
    double mean = 0.0;
    for (double w : record.weights_snapshot) mean += w;
    p.mean_weight = mean / static_cast<double>(record.weights_snapshot.size());
    p.weight_gini = gini(record.weights_snapshot);
    return p;
}

namespace {

nlohmann::json to_json(const DecisionRecord& r) {
    return nlohmann::json{{"id", r.id},
                          {"group", r.group},
                          {"request", r.request},
                          {"u_decision", r.u_decision},
                          {"raw", r.raw},
                          {"normalized", r.normalized},
                          {"adjustment", r.adjustment},
                          {"modulated", r.modulated},
                          {"decision", to_int(r.decision)},
                          {"outcome", to_int(r.outcome)},
                          {"budget_forced", r.budget_forced}};
}

}  // namespace

nlohmann::json to_json(const SimulationTrace& trace) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& rec : trace.epochs) {
        nlohmann::json decisions = nlohmann::json::array();
        for (const auto& d : rec.decisions) decisions.push_back(to_json(d));
        epochs.push_back(nlohmann::json{{"epoch", rec.epoch},
                                        {"log_nwp", rec.log_nwp},
                                        {"error", to_json(rec.error)},
                                        {"weights", rec.weights_snapshot},
                                        {"decisions", std::move(decisions)}});
    }
    return nlohmann::json{{"config", to_json(trace.config)},
                          {"method", to_string(trace.method)},
                          {"initial_weights", trace.initial_weights},
                          {"epochs", std::move(epochs)}};
}

std::string trace_epochs_csv(const SimulationTrace& trace) {
    std::ostringstream out;
    out << "epoch,log_nwp,mean_weight,weight_gini,fpr,fnr,combined_error\n";
    for (const auto& rec : trace.epochs) {
        WelfarePoint p = welfare_point(rec);
        auto cell = [](const std::optional<double>& v) { return v ? fmt_double(*v) : "NA"; };
        out << rec.epoch << ',' << fmt_double(p.log_nwp) << ',' << fmt_double(p.mean_weight)
            << ',' << fmt_double(p.weight_gini) << ',' << cell(rec.error.fpr) << ','
            << cell(rec.error.fnr) << ',' << fmt_double(rec.error.combined) << '\n';
    }
    return out.str();
}

std::string trace_decisions_csv(const SimulationTrace& trace) {
    std::ostringstream out;
    out << "epoch,id,group,request,u_decision,raw,normalized,adjustment,modulated,decision,"
           "outcome,budget_forced\n";
    for (const auto& rec : trace.epochs) {
        for (const auto& d : rec.decisions) {
            out << rec.epoch << ',' << csv_escape(d.id) << ',' << csv_escape(d.group) << ','
                << fmt_double(d.request) << ',' << fmt_double(d.u_decision) << ','
                << fmt_double(d.raw) << ',' << fmt_double(d.normalized) << ','
                << fmt_double(d.adjustment) << ',' << fmt_double(d.modulated) << ','
                << to_int(d.decision) << ',' << to_int(d.outcome) << ','
                << (d.budget_forced ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

}  // namespace nwp
