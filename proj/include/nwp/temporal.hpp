#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nwp/baseline.hpp"
#include "nwp/classifier.hpp"
#include "nwp/core.hpp"
#include "nwp/data.hpp"
#include "nwp/metrics.hpp"
#include "nwp/modulation.hpp"
#include "nwp/rng.hpp"

namespace nwp {

enum class PolicyMode { welfare, fairness, mixed };

std::string to_string(PolicyMode mode);
PolicyMode policy_mode_from_string(const std::string& s);

struct PolicyGoal {
    PolicyMode mode = PolicyMode::welfare;
    double theta = 0.5;         // fairness share when mixed
    double eta_welfare = 0.5;   // step toward the population mean weight
    double eta_fairness = 0.5;  // group-error correction strength
};

void validate(const PolicyGoal& goal);
nlohmann::json to_json(const PolicyGoal& goal);
PolicyGoal policy_goal_from_json(const nlohmann::json& j);

struct SimulationConfig {
    std::size_t population_size = 100;
    int epochs = 6;
    double income_lo = 100.0;
    double income_hi = 1000.0;
    double institution_weight = 0.5;
    double institution_budget = 50000.0;
    double request_spread = 0.2;   // request sd as a fraction of income
    double outcome_spread = 0.3;   // sd of the outcome draw around the raw margin
    std::uint64_t seed = 0;
    bool retrain_each_epoch = false;
    ClassifierConfig classifier;
    ModulationConfig modulation;
    PolicyGoal policy;
    UtilityTable utility_table;  // payoff_shift defaults to income_hi on parse
};

void validate(const SimulationConfig& config);
nlohmann::json to_json(const SimulationConfig& config);
SimulationConfig simulation_config_from_json(const nlohmann::json& j);

// Which decision rule drives the epoch loop.
enum class DecisionMethod { nwp, ceo, none };

std::string to_string(DecisionMethod method);
DecisionMethod method_from_string(const std::string& s);

struct DecisionRecord {
    std::string id;
    std::string group;
    double request = 0.0;
    double u_decision = 0.0;
    double raw = 0.0;
    double normalized = 0.0;
    double adjustment = 0.0;
    double modulated = 0.0;
    Label decision = Label::negative;
    Label outcome = Label::negative;
    bool budget_forced = false;  // approval converted to denial by the budget cap
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    std::vector<DecisionRecord> decisions;
    double log_nwp = 0.0;
    ErrorRates error;
    std::vector<double> weights_snapshot;  // weights in force during this epoch
};

struct SimulationTrace {
    SimulationConfig config;
    DecisionMethod method = DecisionMethod::nwp;
    std::vector<double> initial_weights;
    std::vector<EpochRecord> epochs;
};

// Calibrator + mixing policy for the calibrated-equalized-odds comparator,
// fitted once on training data.
struct CeoContext {
    LogisticCalibrator calibrator;
    MixingPolicy policy;
};

CeoContext fit_ceo(const TrainedClassifier& model, const PopulationSample& train,
                   const CostWeights& weights = {});

// w_i = income_i / income_hi; incomes must already lie in [lo, hi].
void initial_weights(std::vector<IndividualState>& population, const SimulationConfig& config);

// Normal(income, spread * income), redrawn until positive.
double sample_request(double income, double spread, Rng& rng);

// Repay iff Normal(raw_prediction, spread) lands above zero.
Label sample_outcome(double raw_prediction, double spread, Rng& rng);

// Applies the realized scenario's payoffs: individual income (clamped to
// [lo, hi]) plus ledger entry, institution profit, outstanding reduced when
// an approved loan resolves.
void apply_rewards(IndividualState& individual, InstitutionState& institution, Label decision,
                   Label outcome, double principal, const UtilityTable& table, double income_lo,
                   double income_hi, int epoch);

// Stage (b) of the tau update: w += eta * max(0, mean - w). Contracts the
// lower tail toward the mean; exposed separately so its variance-reduction
// property is testable on its own.
std::vector<double> welfare_uplift(std::span<const double> weights, double eta);

// Stage (c): per group g, w *= 1 + eta * (err_g - err_all).
void fairness_adjust(std::vector<double>& weights, std::span<const std::string> groups,
                     const ErrorRates& error, double eta);

// Full end-of-epoch update: income re-derivation, then the welfare and
// fairness stages as weighted by the policy mode, then clamping to [1e-6, 1].
void tau_update(std::vector<IndividualState>& population, const EpochRecord& record,
                const PolicyGoal& policy, double income_hi);

struct SimulationState {
    std::vector<IndividualState> population;
    InstitutionState institution;
    TrainedClassifier model;
};

EpochRecord run_epoch(SimulationState& state, const SimulationConfig& config, int epoch,
                      DecisionMethod method, const CeoContext* ceo, Rng& rng, Rng& ceo_rng);

// Trains once on the sample, then chains `epochs` rounds of decisions,
// sampled outcomes, rewards, and tau updates.
SimulationTrace run_simulation(const SimulationConfig& config, const PopulationSample& sample,
                               DecisionMethod method = DecisionMethod::nwp);

// Split-protocol evaluation: one supervised pass over a held-out sample with
// realized outcomes taken from the dataset labels (no outcome sampling, the
// principal at stake is the individual's income). No state is mutated.
struct SupervisedEval {
    std::vector<DecisionRecord> decisions;
    ErrorRates error;
};

SupervisedEval evaluate_supervised(const SimulationConfig& config,
                                   const TrainedClassifier& model,
                                   const PopulationSample& test, DecisionMethod method,
                                   const CeoContext* ceo, Rng& ceo_rng);

WelfarePoint welfare_point(const EpochRecord& record);

nlohmann::json to_json(const SimulationTrace& trace);
std::string trace_epochs_csv(const SimulationTrace& trace);
std::string trace_decisions_csv(const SimulationTrace& trace);

}  // namespace nwp
