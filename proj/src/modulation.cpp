#include "nwp/modulation.hpp"

#include <cmath>

#include "nwp/errors.hpp"

namespace nwp {

void validate(const ModulationConfig& config) {
    if (!(config.lambda >= 0.0)) throw InvalidInputError("modulation: lambda must be >= 0");
    if (!(config.utility_scale > 0.0))
        throw InvalidInputError("modulation: utility_scale must be > 0");
    if (!std::isfinite(config.threshold))
        throw InvalidInputError("modulation: threshold must be finite");
}

nlohmann::json to_json(const ModulationConfig& c) {
    return nlohmann::json{
        {"lambda", c.lambda}, {"utility_scale", c.utility_scale}, {"threshold", c.threshold}};
}

ModulationConfig modulation_config_from_json(const nlohmann::json& j) {
    ModulationConfig c;
    c.lambda = j.value("lambda", c.lambda);
    c.utility_scale = j.value("utility_scale", c.utility_scale);
    c.threshold = j.value("threshold", c.threshold);
    validate(c);
    return c;
}

ModulatedScore modulate(const MarginDistance& margin, const DecisionUtility& u,
                        const ModulationConfig& config) {
    validate(config);
    if (!std::isfinite(margin.raw) || !std::isfinite(margin.normalized))
        throw InvalidInputError("modulate: non-finite margin");
    if (!std::isfinite(u.u_decision)) throw InvalidInputError("modulate: non-finite u_decision");

    ModulatedScore out;
    out.raw = margin.raw;
    out.adjustment = config.lambda * std::tanh(u.u_decision / config.utility_scale) *
                     (1.0 - std::abs(margin.normalized));
    out.modulated = margin.raw + out.adjustment;
    out.decision = out.modulated > config.threshold ? Label::positive : Label::negative;
    return out;
}

}  // namespace nwp
