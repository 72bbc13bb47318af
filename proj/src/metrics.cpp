#include "nwp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nwp/errors.hpp"
#include "nwp/io.hpp"

namespace nwp {

namespace {

GroupRates rates_from_counts(const ConfusionCounts& c) {
    GroupRates r;
    r.counts = c;
    long neg = c.fp + c.tn;
    long pos = c.tp + c.fn;
    if (neg > 0) r.fpr = static_cast<double>(c.fp) / static_cast<double>(neg);
    if (pos > 0) r.fnr = static_cast<double>(c.fn) / static_cast<double>(pos);
    r.combined = static_cast<double>(c.fp + c.fn) / static_cast<double>(c.total());
    return r;
}

}  // namespace

ErrorRates error_rates(std::span<const Label> decisions, std::span<const Label> outcomes,
                       std::span<const std::string> groups) {
    if (decisions.size() != outcomes.size() || decisions.size() != groups.size())
        throw InvalidInputError("error_rates: input length mismatch");
    if (decisions.empty()) throw InvalidInputError("error_rates: empty input");

    ConfusionCounts overall;
    std::map<std::string, ConfusionCounts> by_group;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        ConfusionCounts& g = by_group[groups[i]];
        bool d = decisions[i] == Label::positive;
        bool o = outcomes[i] == Label::positive;
        if (d && o) { ++overall.tp; ++g.tp; }
        else if (d && !o) { ++overall.fp; ++g.fp; }
        else if (!d && o) { ++overall.fn; ++g.fn; }
        else { ++overall.tn; ++g.tn; }
    }

    ErrorRates r;
    GroupRates top = rates_from_counts(overall);
    r.fpr = top.fpr;
    r.fnr = top.fnr;
    r.combined = top.combined;
    r.counts = overall;
    for (const auto& [name, counts] : by_group) r.per_group[name] = rates_from_counts(counts);
    return r;
}

double gini(std::span<const double> values) {
    if (values.empty()) throw InvalidInputError("gini: empty input");
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidInputError("gini: values must be finite and non-negative");
        sum += v;
    }
    if (sum == 0.0) throw InvalidInputError("gini: all-zero input");

    // Sorted form of sum_ij |v_i - v_j| / (2 n^2 mean).
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
    return weighted / (n * sum);
}

ComparisonReport build_report(const std::vector<MethodSeries>& series,
                              const std::string& baseline_method,
                              const std::string& index_kind) {
    if (series.empty()) throw InvalidInputError("build_report: no method series");
    const std::size_t len = series.front().rates.size();
    const MethodSeries* baseline = nullptr;
    for (const auto& s : series) {
        if (s.rates.size() != len)
            throw InvalidInputError("build_report: misaligned series for method '" + s.method +
                                    "'");
        if (!s.welfare.empty() && s.welfare.size() != len)
            throw InvalidInputError("build_report: misaligned welfare series for method '" +
                                    s.method + "'");
        if (s.method == baseline_method) baseline = &s;
    }

    ComparisonReport report;
    report.baseline_method = baseline ? baseline_method : "";
    report.index_kind = index_kind;
    for (const auto& s : series) report.methods.push_back(s.method);
    for (const auto& s : series) {
        for (std::size_t i = 0; i < len; ++i) {
            ReportRow row;
            row.method = s.method;
            row.index = static_cast<int>(i + 1);
            row.rates = s.rates[i];
            if (baseline)
                row.delta_combined = s.rates[i].combined - baseline->rates[i].combined;
            if (!s.welfare.empty()) row.welfare = s.welfare[i];
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

nlohmann::json counts_json(const ConfusionCounts& c) {
    return nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

nlohmann::json to_json(const ErrorRates& r) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [name, g] : r.per_group) {
        groups[name] = {{"fpr", opt_json(g.fpr)},
                        {"fnr", opt_json(g.fnr)},
                        {"combined", g.combined},
                        {"counts", counts_json(g.counts)}};
    }
    return nlohmann::json{{"fpr", opt_json(r.fpr)},
                          {"fnr", opt_json(r.fnr)},
                          {"combined", r.combined},
                          {"counts", counts_json(r.counts)},
                          {"per_group", groups}};
}

nlohmann::json to_json(const ComparisonReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json j{{"method", row.method},
                         {report.index_kind, row.index},
                         {"rates", to_json(row.rates)}};
        j["delta_combined"] = row.delta_combined ? nlohmann::json(*row.delta_combined)
                                                 : nlohmann::json(nullptr);
        if (row.welfare) {
            j["log_nwp"] = row.welfare->log_nwp;
            j["mean_weight"] = row.welfare->mean_weight;
            j["weight_gini"] = row.welfare->weight_gini;
        }
        rows.push_back(std::move(j));
    }
    return nlohmann::json{{"methods", report.methods},
                          {"baseline_method", report.baseline_method},
                          {"index_kind", report.index_kind},
                          {"rows", rows}};
}

std::string report_to_csv(const ComparisonReport& report) {
    std::ostringstream out;
    out << "method," << report.index_kind
        << ",fpr,fnr,combined,delta_combined,log_nwp,mean_weight,weight_gini\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt_double(*v) : "NA"; };
    for (const auto& row : report.rows) {
        out << csv_escape(row.method) << ',' << row.index << ',' << cell(row.rates.fpr) << ','
            << cell(row.rates.fnr) << ',' << fmt_double(row.rates.combined) << ','
            << cell(row.delta_combined) << ',';
        if (row.welfare) {
            out << fmt_double(row.welfare->log_nwp) << ',' << fmt_double(row.welfare->mean_weight)
                << ',' << fmt_double(row.welfare->weight_gini);
        } else {
            out << "NA,NA,NA";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace nwp
