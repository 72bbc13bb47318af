#pragma once

#include "json.hpp"
#include "nwp/classifier.hpp"
#include "nwp/core.hpp"

namespace nwp {

struct ModulationConfig {
    double lambda = 0.5;        // utility influence strength, >= 0
    double utility_scale = 1.0; // squash scale for u_decision, > 0
    double threshold = 0.0;     // decision cut on the modulated score
};

void validate(const ModulationConfig& config);
nlohmann::json to_json(const ModulationConfig& config);
ModulationConfig modulation_config_from_json(const nlohmann::json& j);

struct ModulatedScore {
    double raw = 0.0;
    double adjustment = 0.0;
    double modulated = 0.0;  // raw + adjustment
    Label decision = Label::negative;
};

// Shifts the raw score by lambda * tanh(u_decision / scale) * (1 - |eps|).
// The welfare term is squashed so it cannot override a confident
// classification unless lambda is set large deliberately, and the
// (1 - |eps|) gate closes entirely at |eps| = 1.
ModulatedScore modulate(const MarginDistance& margin, const DecisionUtility& u,
                        const ModulationConfig& config);

}  // namespace nwp
