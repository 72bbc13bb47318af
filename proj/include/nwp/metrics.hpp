#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nwp/core.hpp"

namespace nwp {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

struct GroupRates {
    // fpr undefined when the group has no negatives, fnr when no positives;
    // undefined rates are explicit markers, never silent zeros.
    std::optional<double> fpr;
    std::optional<double> fnr;
    double combined = 0.0;
    ConfusionCounts counts;
};

struct ErrorRates {
    std::optional<double> fpr;
    std::optional<double> fnr;
    double combined = 0.0;  // (fp + fn) / total
    std::map<std::string, GroupRates> per_group;
    ConfusionCounts counts;
};

ErrorRates error_rates(std::span<const Label> decisions, std::span<const Label> outcomes,
                       std::span<const std::string> groups);

// Standard Gini coefficient: mean-normalized pairwise absolute difference / 2.
double gini(std::span<const double> values);

struct WelfarePoint {
    double log_nwp = 0.0;
    double mean_weight = 0.0;
    double weight_gini = 0.0;
};

// One method's error (and optionally welfare) series across epochs or splits.
struct MethodSeries {
    std::string method;
    std::vector<ErrorRates> rates;
    std::vector<WelfarePoint> welfare;  // empty when the protocol has no welfare state
};

struct ReportRow {
    std::string method;
    int index = 0;  // epoch or split number
    ErrorRates rates;
    std::optional<double> delta_combined;  // vs the baseline method, same index
    std::optional<WelfarePoint> welfare;
};

struct ComparisonReport {
    std::vector<std::string> methods;
    std::string baseline_method;  // empty when no baseline designated
    std::string index_kind;       // "epoch" or "split"
    std::vector<ReportRow> rows;
};

ComparisonReport build_report(const std::vector<MethodSeries>& series,
                              const std::string& baseline_method,
                              const std::string& index_kind);

nlohmann::json to_json(const ErrorRates& rates);
nlohmann::json to_json(const ComparisonReport& report);
std::string report_to_csv(const ComparisonReport& report);

}  // namespace nwp
