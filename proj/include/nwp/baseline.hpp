#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nwp/core.hpp"
#include "nwp/rng.hpp"

namespace nwp {

struct GroupScores {
    std::string group;
    std::vector<double> scores;  // calibrated probabilities in [0, 1]
    std::vector<Label> labels;
};

void validate(const GroupScores& g);

struct CostWeights {
    double fp_weight = 1.0;
    double fn_weight = 1.0;
};

struct MixingPolicy {
    std::map<std::string, double> alpha_per_group;      // mixing rate in [0, 1]
    CostWeights cost_weights;
    std::map<std::string, double> base_rate_per_group;  // empirical positive rate
    // Leftover cost gap when even alpha = 1 cannot equalize; 0 otherwise.
    double residual_gap = 0.0;
};

nlohmann::json to_json(const MixingPolicy& policy);

// Generalized (score-based) rates: gFPR = mean score over true negatives,
// gFNR = mean (1 - score) over true positives.
struct GeneralizedRates {
    double gfpr = 0.0;
    double gfnr = 0.0;
};

GeneralizedRates generalized_rates(const GroupScores& g);

// Weighted cost w_fp * gFPR + w_fn * gFNR of a group's scores.
double weighted_cost(const GroupScores& g, const CostWeights& weights);

// Finds the lower-cost group and the mixing rate alpha that replaces its
// scores with the group base rate often enough to equalize the weighted
// costs: (1 - alpha) * cost_low + alpha * cost_base = cost_high, clamped
// to [0, 1]. Symmetric in its two arguments.
MixingPolicy fit_mixing(const GroupScores& a, const GroupScores& b,
                        const CostWeights& weights);

// With probability alpha for the score's group, returns the group base rate;
// otherwise the score unchanged.
double apply_mixing(double score, const std::string& group, const MixingPolicy& policy,
                    Rng& rng);

// Maps raw classifier margins to [0, 1] probabilities: sigmoid(a*raw + b)
// fitted by maximum likelihood with Platt's smoothed targets (which keep
// the optimum finite on separable data).
struct LogisticCalibrator {
    double a = 1.0;
    double b = 0.0;
    double operator()(double raw) const;
};

LogisticCalibrator fit_calibrator(std::span<const double> raw_margins,
                                  std::span<const Label> labels);

}  // namespace nwp
