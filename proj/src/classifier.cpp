#include "nwp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "nwp/errors.hpp"

namespace nwp {

void validate(const ClassifierConfig& config) {
    if (!(config.c > 0.0)) throw InvalidInputError("classifier config: c must be > 0");
    if (!(config.learning_rate > 0.0))
        throw InvalidInputError("classifier config: learning_rate must be > 0");
    if (config.max_iterations < 1)
        throw InvalidInputError("classifier config: max_iterations must be >= 1");
    if (!(config.tolerance > 0.0))
        throw InvalidInputError("classifier config: tolerance must be > 0");
}

nlohmann::json to_json(const ClassifierConfig& c) {
    return nlohmann::json{{"c", c.c},
                          {"gamma", c.gamma},
                          {"learning_rate", c.learning_rate},
                          {"max_iterations", c.max_iterations},
                          {"tolerance", c.tolerance},
                          {"seed", c.seed}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json& j) {
    ClassifierConfig c;
    c.c = j.value("c", c.c);
    c.gamma = j.value("gamma", c.gamma);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.seed = j.value("seed", c.seed);
    validate(c);
    return c;
}

namespace {

struct Standardized {
    std::vector<std::vector<double>> x;  // row-major, standardized
    std::vector<double> y;               // labels mapped to -1/+1
    std::vector<FeatureScaling> scaling;
};

Standardized standardize(const std::vector<LabeledPoint>& dataset, std::size_t dim) {
    Standardized s;
    s.scaling.resize(dim);
    const double n = static_cast<double>(dataset.size());
    for (std::size_t f = 0; f < dim; ++f) {
        double mean = 0.0;
        for (const auto& p : dataset) mean += p.features.values[f];
        mean /= n;
        double var = 0.0;
        for (const auto& p : dataset) {
            double d = p.features.values[f] - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / n);
        s.scaling[f].mean = mean;
        s.scaling[f].scale = sd > 1e-12 ? sd : 1.0;
    }
    s.x.reserve(dataset.size());
    s.y.reserve(dataset.size());
    for (const auto& p : dataset) {
        std::vector<double> row(dim);
        for (std::size_t f = 0; f < dim; ++f)
            row[f] = (p.features.values[f] - s.scaling[f].mean) / s.scaling[f].scale;
        s.x.push_back(std::move(row));
        s.y.push_back(p.label == Label::positive ? 1.0 : -1.0);
    }
    return s;
}

double objective(const Standardized& s, const std::vector<double>& w, double b, double c) {
    double reg = 0.0;
    for (double wi : w) reg += wi * wi;
    double hinge = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        double f = b;
        for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * s.x[i][k];
        hinge += std::max(0.0, 1.0 - s.y[i] * f);
    }
    return 0.5 * reg + c * hinge / static_cast<double>(s.x.size());
}

void subgradient(const Standardized& s, const std::vector<double>& w, double b, double c,
                 std::vector<double>& gw, double& gb) {
    gw.assign(w.size(), 0.0);
    gb = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        double f = b;
        for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * s.x[i][k];
        if (s.y[i] * f < 1.0) {
            for (std::size_t k = 0; k < w.size(); ++k) gw[k] -= s.y[i] * s.x[i][k];
            gb -= s.y[i];
        }
    }
    const double scale = c / static_cast<double>(s.x.size());
    for (std::size_t k = 0; k < w.size(); ++k) gw[k] = w[k] + scale * gw[k];
    gb *= scale;
}

}  // namespace

TrainedClassifier train(const std::vector<LabeledPoint>& dataset,
                        const ClassifierConfig& config) {
    validate(config);
    if (dataset.empty()) throw InvalidInputError("train: empty dataset");
    const std::size_t dim = dataset.front().features.values.size();
    if (dim == 0) throw InvalidInputError("train: zero-dimensional features");

    bool has_pos = false, has_neg = false;
    for (const auto& p : dataset) {
        if (p.features.values.size() != dim)
            throw InvalidInputError("train: inconsistent feature dimension (" +
                                    std::to_string(p.features.values.size()) + " vs " +
                                    std::to_string(dim) + ")");
        validate(p.features);
        (p.label == Label::positive ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw DegenerateDataError("train: dataset contains a single class");
    if (config.gamma != 0.5)
        std::cerr << "warning: gamma=" << config.gamma
                  << " is recorded but unused (classifier is strictly linear)\n";

    Standardized s = standardize(dataset, dim);

    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    double f_cur = objective(s, w, b, config.c);

    TrainedClassifier model;
    model.objective_checkpoints.push_back(f_cur);

    std::vector<double> gw;
    std::vector<double> w_try(dim);
    double gb = 0.0;
    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 50;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        subgradient(s, w, b, config.c, gw, gb);
        double gnorm2 = gb * gb;
        for (double g : gw) gnorm2 += g * g;
        if (gnorm2 == 0.0) break;

        // Backtrack until the step actually decreases the objective. Only
        // accepted steps are kept, so the checkpoint sequence never rises.
        double step = config.learning_rate;
        double f_new = f_cur;
        double b_try = b;
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h) {
            for (std::size_t k = 0; k < dim; ++k) w_try[k] = w[k] - step * gw[k];
            b_try = b - step * gb;
            f_new = objective(s, w_try, b_try, config.c);
            if (f_new <= f_cur - kArmijo * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no improving step exists at this resolution

        w = w_try;
        b = b_try;
        double improvement = f_cur - f_new;
        f_cur = f_new;
        model.objective_checkpoints.push_back(f_cur);
        if (improvement <= config.tolerance * std::max(1.0, std::abs(f_cur))) break;
    }

    model.weights = std::move(w);
    model.bias = b;
    model.feature_scaling = std::move(s.scaling);
    model.training_loss = f_cur;
    model.config = config;

    // q95 of |raw| over the training set, nearest-rank.
    std::vector<double> abs_raw;
    abs_raw.reserve(dataset.size());
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        double f = model.bias;
        for (std::size_t k = 0; k < dim; ++k) f += model.weights[k] * s.x[i][k];
        abs_raw.push_back(std::abs(f));
    }
    std::sort(abs_raw.begin(), abs_raw.end());
    std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(abs_raw.size())));
    model.q95 = std::max(abs_raw[rank == 0 ? 0 : rank - 1], 1e-12);
    return model;
}

MarginDistance margin(const TrainedClassifier& model, const FeatureVector& x) {
    if (x.values.size() != model.weights.size())
        throw InvalidInputError("margin: feature dimension mismatch (" +
                                std::to_string(x.values.size()) + " vs " +
                                std::to_string(model.weights.size()) + ")");
    double raw = model.bias;
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        double scaled = (x.values[k] - model.feature_scaling[k].mean) /
                        model.feature_scaling[k].scale;
        raw += model.weights[k] * scaled;
    }
    MarginDistance m;
    m.raw = raw;
    m.normalized = std::clamp(raw / model.q95, -1.0, 1.0);
    return m;
}

Label predict(const TrainedClassifier& model, const FeatureVector& x) {
    return margin(model, x).raw > 0.0 ? Label::positive : Label::negative;
}

nlohmann::json to_json(const TrainedClassifier& model) {
    nlohmann::json scaling = nlohmann::json::array();
    for (const auto& fs : model.feature_scaling)
        scaling.push_back({{"mean", fs.mean}, {"scale", fs.scale}});
    return nlohmann::json{{"weights", model.weights},
                          {"bias", model.bias},
                          {"feature_scaling", scaling},
                          {"q95", model.q95},
                          {"training_loss", model.training_loss},
                          {"config", to_json(model.config)}};
}

TrainedClassifier classifier_from_json(const nlohmann::json& j) {
    TrainedClassifier model;
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    for (const auto& fs : j.at("feature_scaling")) {
        FeatureScaling scaling;
        scaling.mean = fs.at("mean").get<double>();
        scaling.scale = fs.at("scale").get<double>();
        if (!(scaling.scale > 0.0))
            throw InvalidInputError("classifier_from_json: scale must be > 0");
        model.feature_scaling.push_back(scaling);
    }
    if (model.feature_scaling.size() != model.weights.size())
        throw InvalidInputError("classifier_from_json: scaling/weights length mismatch");
    model.q95 = j.at("q95").get<double>();
    model.training_loss = j.value("training_loss", 0.0);
    model.config = classifier_config_from_json(j.at("config"));
    return model;
}

}  // namespace nwp
