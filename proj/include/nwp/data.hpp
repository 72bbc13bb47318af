#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nwp/core.hpp"
#include "nwp/rng.hpp"

namespace nwp {

struct DatasetSchema {
    std::string name;  // adult | compas | synthetic | sample
    std::vector<std::string> feature_columns;
    std::string label_column;
    std::string group_column;
    std::string income_column;  // empty when the dataset has no income proxy column
    // Per-column categorical encodings. A column listed here must have every
    // value mapped; the group column is the one exception, where unmapped
    // values mean "not an analyzed group" and the row is dropped and counted.
    std::map<std::string, std::map<std::string, double>> numeric_encodings;
};

void validate(const DatasetSchema& schema);
nlohmann::json to_json(const DatasetSchema& schema);
DatasetSchema schema_from_json(const nlohmann::json& j);

// Built-in schemas, identical to the JSON files shipped under schemas/.
DatasetSchema adult_schema();
DatasetSchema compas_schema();

struct RawTable {
    std::vector<std::string> columns;        // used columns, schema order
    std::vector<std::vector<double>> rows;   // encoded values, parallel to columns
    std::vector<std::string> groups;         // raw group strings per row
    std::vector<std::size_t> source_rows;    // 1-based data row numbers in the file
    std::size_t dropped_missing = 0;
    std::size_t dropped_group = 0;
    std::string source;
    std::uint64_t source_hash = 0;

    std::size_t column_index(const std::string& name) const;
};

// Parses the CSV, applies numeric encodings, drops rows with missing cells
// ("" or "?") in used columns. Malformed cells and unmapped categorical
// values (outside the group column) raise IngestionError naming the spot.
RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

struct Provenance {
    std::string source;
    std::string source_hash;  // fnv1a64, hex
    std::uint64_t seed = 0;
    std::string filter;
    std::size_t dropped_missing = 0;
    std::size_t dropped_group = 0;
};

struct PopulationSample {
    std::vector<IndividualState> individuals;
    std::vector<Label> labels;  // dataset labels, parallel to individuals
    DatasetSchema schema;
    Provenance provenance;
};

void validate(const PopulationSample& sample, double income_lo, double income_hi);

// Samples n/2 rows per analyzed group without replacement, maps the income
// proxy (income bracket + education + hours) linearly onto [lo, hi], and
// adds clamped gaussian noise.
PopulationSample prepare_adult(const RawTable& table, std::size_t n, double lo, double hi,
                               double noise_sd, Rng& rng);

// Retains rows with age <= max_age and priors < max_priors. The income field
// becomes a stake proxy favoring young defendants with few priors.
PopulationSample prepare_compas(const RawTable& table, int max_age, int max_priors,
                                double lo = 100.0, double hi = 1000.0);

struct SplitResult {
    PopulationSample train;
    PopulationSample test;
};

// Seeded stratified split; group proportions preserved within one individual.
SplitResult split(const PopulationSample& sample, double train_fraction, std::uint64_t seed);

struct SyntheticSpec {
    std::size_t size = 100;
    double income_lo = 100.0;
    double income_hi = 1000.0;
    std::string group_a = "groupA";
    std::string group_b = "groupB";
    double mean_income_a = 620.0;
    double mean_income_b = 420.0;
    double sd_income = 160.0;
    double feature_noise_sd = 0.6;  // cluster overlap
    double label_noise_sd = 0.25;   // gaussian noise inside the planted rule
    bool race_aware = true;
};

void validate(const SyntheticSpec& spec);
nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

// Two-group population with gaussian incomes, income-linked feature clusters,
// and labels planted by a linear rule plus optional noise.
PopulationSample synthesize_population(const SyntheticSpec& spec, Rng& rng);

// sample.csv round-trip: id,group,income,weight,label,<features...>.
std::string population_to_csv(const PopulationSample& sample);
PopulationSample population_from_csv(const std::filesystem::path& path);
nlohmann::json population_provenance_json(const PopulationSample& sample);

}  // namespace nwp
