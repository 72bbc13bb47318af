#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "nwp/core.hpp"

namespace nwp {

struct ClassifierConfig {
    double c = 1.0;       // hinge-loss trade-off
    double gamma = 0.5;   // recorded but never read; kept for protocol fidelity
    double learning_rate = 1.0;  // initial line-search step
    int max_iterations = 500;
    double tolerance = 1e-10;  // relative objective improvement for convergence
    std::uint64_t seed = 0;
};

void validate(const ClassifierConfig& config);
nlohmann::json to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

struct LabeledPoint {
    FeatureVector features;
    Label label = Label::negative;
};

struct FeatureScaling {
    double mean = 0.0;
    double scale = 1.0;  // strictly positive
};

struct MarginDistance {
    double raw = 0.0;         // w.x + b on standardized features
    double normalized = 0.0;  // raw / q95, clamped to [-1, 1]
};

struct TrainedClassifier {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<FeatureScaling> feature_scaling;
    double q95 = 1.0;  // 95th percentile of |raw| over the training set
    double training_loss = 0.0;
    ClassifierConfig config;
    // Objective at each accepted descent step; in-memory only, not serialized.
    std::vector<double> objective_checkpoints;
};

// Minimizes 0.5*||w||^2 + C * mean(hinge) on standardized features by
// deterministic subgradient descent with backtracking line search. The
// mean-normalized data term keeps training invariant under dataset
// duplication, which the sum form is not.
TrainedClassifier train(const std::vector<LabeledPoint>& dataset,
                        const ClassifierConfig& config);

MarginDistance margin(const TrainedClassifier& model, const FeatureVector& x);

// 1 iff raw margin > 0; a point exactly on the hyperplane is denied.
Label predict(const TrainedClassifier& model, const FeatureVector& x);

nlohmann::json to_json(const TrainedClassifier& model);
TrainedClassifier classifier_from_json(const nlohmann::json& j);

}  // namespace nwp
