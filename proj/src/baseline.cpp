#include "nwp/baseline.hpp"

#include <cmath>

#include "nwp/errors.hpp"

namespace nwp {

void validate(const GroupScores& g) {
    if (g.scores.size() != g.labels.size())
        throw InvalidInputError("group '" + g.group + "': scores/labels length mismatch");
    for (double s : g.scores)
        if (!(s >= 0.0 && s <= 1.0))
            throw InvalidInputError("group '" + g.group + "': scores must lie in [0, 1]");
}

GeneralizedRates generalized_rates(const GroupScores& g) {
    validate(g);
    double fp_sum = 0.0, fn_sum = 0.0;
    long negatives = 0, positives = 0;
    for (std::size_t i = 0; i < g.scores.size(); ++i) {
        if (g.labels[i] == Label::negative) {
            fp_sum += g.scores[i];
            ++negatives;
        } else {
            fn_sum += 1.0 - g.scores[i];
            ++positives;
        }
    }
    if (negatives == 0 || positives == 0)
        throw DegenerateDataError("group '" + g.group + "': needs both label classes");
    return {fp_sum / static_cast<double>(negatives), fn_sum / static_cast<double>(positives)};
}

double weighted_cost(const GroupScores& g, const CostWeights& weights) {
    GeneralizedRates r = generalized_rates(g);
    return weights.fp_weight * r.gfpr + weights.fn_weight * r.gfnr;
}

namespace {

double base_rate(const GroupScores& g) {
    double pos = 0.0;
    for (Label l : g.labels)
        if (l == Label::positive) pos += 1.0;
    return pos / static_cast<double>(g.labels.size());
}

// Cost of the trivial predictor that outputs the base rate for everyone:
// gFPR = mu, gFNR = 1 - mu.
double base_rate_cost(double mu, const CostWeights& w) {
    return w.fp_weight * mu + w.fn_weight * (1.0 - mu);
}

}  // namespace

MixingPolicy fit_mixing(const GroupScores& a, const GroupScores& b,
                        const CostWeights& weights) {
    if (!(weights.fp_weight >= 0.0) || !(weights.fn_weight >= 0.0) ||
        weights.fp_weight + weights.fn_weight <= 0.0)
        throw InvalidInputError("fit_mixing: cost weights must be non-negative, not both zero");
    if (a.group == b.group) throw InvalidInputError("fit_mixing: groups must differ");

    const double cost_a = weighted_cost(a, weights);
    const double cost_b = weighted_cost(b, weights);

    MixingPolicy policy;
    policy.cost_weights = weights;
    policy.base_rate_per_group[a.group] = base_rate(a);
    policy.base_rate_per_group[b.group] = base_rate(b);
    policy.alpha_per_group[a.group] = 0.0;
    policy.alpha_per_group[b.group] = 0.0;
    if (cost_a == cost_b) return policy;  // already equal

    const GroupScores& low = cost_a < cost_b ? a : b;
    const double cost_low = std::min(cost_a, cost_b);
    const double cost_high = std::max(cost_a, cost_b);
    const double cost_base = base_rate_cost(policy.base_rate_per_group[low.group], weights);

    // Mixing at rate alpha gives expected cost (1-alpha)*cost_low + alpha*cost_base.
    const double denom = cost_base - cost_low;
    double alpha;
    if (denom > 0.0 && (cost_high - cost_low) / denom <= 1.0) {
        alpha = (cost_high - cost_low) / denom;
    } else {
        // Even full base-rate replacement cannot reach the other group's cost.
        alpha = 1.0;
        policy.residual_gap = std::abs(cost_high - cost_base);
    }
    policy.alpha_per_group[low.group] = alpha;
    return policy;
}

double apply_mixing(double score, const std::string& group, const MixingPolicy& policy,
                    Rng& rng) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InvalidInputError("apply_mixing: score must lie in [0, 1]");
    auto alpha_it = policy.alpha_per_group.find(group);
    if (alpha_it == policy.alpha_per_group.end())
        throw InvalidInputError("apply_mixing: unknown group '" + group + "'");
    if (rng.uniform01() < alpha_it->second) return policy.base_rate_per_group.at(group);
    return score;
}

nlohmann::json to_json(const MixingPolicy& policy) {
    return nlohmann::json{
        {"alpha_per_group", policy.alpha_per_group},
        {"base_rate_per_group", policy.base_rate_per_group},
        {"cost_weights",
         {{"fp_weight", policy.cost_weights.fp_weight},
          {"fn_weight", policy.cost_weights.fn_weight}}},
        {"residual_gap", policy.residual_gap}};
}

double LogisticCalibrator::operator()(double raw) const {
    double z = a * raw + b;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

LogisticCalibrator fit_calibrator(std::span<const double> raw_margins,
                                  std::span<const Label> labels) {
    if (raw_margins.size() != labels.size())
        throw InvalidInputError("fit_calibrator: margins/labels length mismatch");
    if (raw_margins.empty()) throw InvalidInputError("fit_calibrator: empty input");

    long n_pos = 0, n_neg = 0;
    for (Label l : labels) (l == Label::positive ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateDataError("fit_calibrator: needs both label classes");

    // Platt's smoothed targets.
    const double t_pos = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_neg) + 2.0);

    std::vector<double> target(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        target[i] = labels[i] == Label::positive ? t_pos : t_neg;

    auto nll = [&](double a, double b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < raw_margins.size(); ++i) {
            double z = a * raw_margins[i] + b;
            // ln(1 + e^-z) + (1 - t) * z, computed stably on both tails.
            if (z >= 0.0)
                sum += std::log1p(std::exp(-z)) + (1.0 - target[i]) * z;
            else
                sum += std::log1p(std::exp(z)) - target[i] * z;
        }
        return sum;
    };

    double a = 0.0;
    double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    double f = nll(a, b);

    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
        for (std::size_t i = 0; i < raw_margins.size(); ++i) {
            double r = raw_margins[i];
            double z = a * r + b;
            double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                : std::exp(z) / (1.0 + std::exp(z));
            double d = p - target[i];
            double v = std::max(p * (1.0 - p), 1e-12);
            ga += d * r;
            gb += d;
            haa += v * r * r;
            hab += v * r;
            hbb += v;
        }
        if (std::abs(ga) < 1e-10 && std::abs(gb) < 1e-10) break;

        double det = haa * hbb - hab * hab;
        double da = -(hbb * ga - hab * gb) / det;
        double db = -(-hab * ga + haa * gb) / det;

        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40; ++h) {
            double f_new = nll(a + step * da, b + step * db);
            if (f_new < f) {
                a += step * da;
                b += step * db;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return {a, b};
}

}  // namespace nwp
