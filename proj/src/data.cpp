#include "nwp/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nwp/errors.hpp"
#include "nwp/io.hpp"

namespace nwp {

void validate(const DatasetSchema& schema) {
    if (schema.name.empty()) throw InvalidInputError("schema: name must be set");
    if (schema.feature_columns.empty())
        throw InvalidInputError("schema: feature_columns must be non-empty");
    if (schema.label_column.empty()) throw InvalidInputError("schema: label_column must be set");
    if (schema.group_column.empty()) throw InvalidInputError("schema: group_column must be set");
}

nlohmann::json to_json(const DatasetSchema& s) {
    return nlohmann::json{{"name", s.name},
                          {"feature_columns", s.feature_columns},
                          {"label_column", s.label_column},
                          {"group_column", s.group_column},
                          {"income_column", s.income_column},
                          {"numeric_encodings", s.numeric_encodings}};
}

DatasetSchema schema_from_json(const nlohmann::json& j) {
    DatasetSchema s;
    s.name = j.at("name").get<std::string>();
    s.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    s.label_column = j.at("label_column").get<std::string>();
    s.group_column = j.at("group_column").get<std::string>();
    s.income_column = j.value("income_column", std::string());
    if (j.contains("numeric_encodings"))
        s.numeric_encodings =
            j.at("numeric_encodings")
                .get<std::map<std::string, std::map<std::string, double>>>();
    validate(s);
    return s;
}

DatasetSchema adult_schema() {
    DatasetSchema s;
    s.name = "adult";
    s.feature_columns = {"age", "education-num", "hours-per-week", "race"};
    s.label_column = "income";
    s.group_column = "race";
    s.income_column = "income";
    s.numeric_encodings = {
        {"race", {{"White", 0.0}, {"African-American", 1.0}}},
        {"income", {{"<=50K", 0.0}, {">50K", 1.0}}},
    };
    return s;
}

DatasetSchema compas_schema() {
    DatasetSchema s;
    s.name = "compas";
    s.feature_columns = {"age", "race", "priors_count"};
    s.label_column = "two_year_recid";
    s.group_column = "race";
    s.income_column = "";
    s.numeric_encodings = {
        {"race", {{"Caucasian", 0.0}, {"African-American", 1.0}}},
    };
    return s;
}

std::size_t RawTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InvalidInputError("unknown column '" + name + "'");
}

namespace {

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

std::vector<std::string> used_columns(const DatasetSchema& schema) {
    std::vector<std::string> used = schema.feature_columns;
    auto add = [&](const std::string& c) {
        if (!c.empty() && std::find(used.begin(), used.end(), c) == used.end())
            used.push_back(c);
    };
    add(schema.label_column);
    add(schema.group_column);
    add(schema.income_column);
    return used;
}

}  // namespace

RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
    validate(schema);
    std::string text = read_file(path);
    auto cells = parse_csv(text);
    if (cells.empty()) throw IngestionError("empty CSV: " + path.string());

    const std::vector<std::string>& header = cells.front();
    RawTable table;
    table.columns = used_columns(schema);
    table.source = path.string();
    table.source_hash = fnv1a64(text);

    std::vector<std::size_t> col_pos;
    for (const auto& name : table.columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw IngestionError("header mismatch: column '" + name + "' not found in " +
                                 path.string());
        col_pos.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    const std::size_t group_col = table.column_index(schema.group_column);

    for (std::size_t r = 1; r < cells.size(); ++r) {
        const auto& raw_row = cells[r];
        if (raw_row.size() == 1 && raw_row[0].empty()) continue;  // blank line
        if (raw_row.size() != header.size())
            throw IngestionError("row " + std::to_string(r) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " +
                                 std::to_string(raw_row.size()));

        std::vector<double> row(table.columns.size());
        bool missing = false;
        bool foreign_group = false;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const std::string& cell = raw_row[col_pos[c]];
            if (is_missing(cell)) {
                missing = true;
                break;
            }
            const std::string& col = table.columns[c];
            auto enc = schema.numeric_encodings.find(col);
            if (enc != schema.numeric_encodings.end()) {
                auto value = enc->second.find(cell);
                if (value == enc->second.end()) {
                    if (c == group_col) {
                        foreign_group = true;  // not one of the analyzed groups
                        continue;
                    }
                    throw IngestionError("row " + std::to_string(r) + ", column '" + col +
                                         "': unmapped categorical value '" + cell + "'");
                }
                row[c] = value->second;
            } else if (c == group_col) {
                // group stays categorical when the schema assigns it no encoding
            } else {
                try {
                    std::size_t pos = 0;
                    row[c] = std::stod(cell, &pos);
                    if (pos != cell.size()) throw std::invalid_argument(cell);
                } catch (const std::exception&) {
                    throw IngestionError("row " + std::to_string(r) + ", column '" + col +
                                         "': unparseable cell '" + cell + "'");
                }
            }
        }
        if (missing) {
            ++table.dropped_missing;
            continue;
        }
        if (foreign_group) {
            ++table.dropped_group;
            continue;
        }
        table.rows.push_back(std::move(row));
        table.groups.push_back(raw_row[col_pos[group_col]]);
        table.source_rows.push_back(r);
    }
    return table;
}

void validate(const PopulationSample& sample, double income_lo, double income_hi) {
    if (sample.individuals.size() != sample.labels.size())
        throw InvalidInputError("population: individuals/labels length mismatch");
    for (const auto& ind : sample.individuals) {
        validate(ind.features);
        if (!(ind.income >= income_lo && ind.income <= income_hi))
            throw InvalidInputError("individual '" + ind.id + "': income " +
                                    fmt_double(ind.income) + " outside [" +
                                    fmt_double(income_lo) + ", " + fmt_double(income_hi) + "]");
        if (!(ind.weight >= 0.0))
            throw InvalidInputError("individual '" + ind.id + "': negative weight");
    }
}

namespace {

IndividualState make_individual(const DatasetSchema& schema, const RawTable& table,
                                std::size_t row, double income, double income_hi) {
    IndividualState ind;
    ind.id = schema.name + "-" + std::to_string(table.source_rows[row]);
    ind.group = table.groups[row];
    ind.income = income;
    ind.weight = income / income_hi;
    for (const auto& col : schema.feature_columns) {
        ind.features.names.push_back(col);
        ind.features.values.push_back(table.rows[row][table.column_index(col)]);
    }
    return ind;
}

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = hex_digit(v);
        v >>= 4;
    }
    return s;
}

}  // namespace

PopulationSample prepare_adult(const RawTable& table, std::size_t n, double lo, double hi,
                               double noise_sd, Rng& rng) {
    if (n == 0 || n % 2 != 0) throw InvalidInputError("prepare_adult: n must be even and > 0");
    if (!(lo < hi)) throw InvalidInputError("prepare_adult: lo must be < hi");
    if (!(noise_sd >= 0.0)) throw InvalidInputError("prepare_adult: noise_sd must be >= 0");

    const DatasetSchema schema = adult_schema();
    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t r = 0; r < table.rows.size(); ++r) by_group[table.groups[r]].push_back(r);

    const std::size_t per_group = n / 2;
    std::vector<std::size_t> chosen;
    // Iterate the analyzed groups from the schema so a group absent from the
    // data fails loudly instead of shrinking the sample.
    for (const auto& [group, code] : schema.numeric_encodings.at(schema.group_column)) {
        (void)code;
        const auto& rows = by_group[group];
        if (rows.size() < per_group)
            throw DegenerateDataError("prepare_adult: group '" + group + "' has only " +
                                      std::to_string(rows.size()) + " rows, need " +
                                      std::to_string(per_group));
        auto order = rng.shuffled_indices(rows.size());
        for (std::size_t k = 0; k < per_group; ++k) chosen.push_back(rows[order[k]]);
    }

    const std::size_t bin_col = table.column_index(schema.income_column);
    const std::size_t edu_col = table.column_index("education-num");
    const std::size_t hrs_col = table.column_index("hours-per-week");
    const std::size_t label_col = table.column_index(schema.label_column);

    PopulationSample sample;
    sample.schema = schema;
    for (std::size_t row : chosen) {
        // Fixed linear proxy for the UCI binary income bracket: the bracket
        // dominates, education and hours break ties within a bracket.
        double bracket = table.rows[row][bin_col];
        double edu = std::clamp(table.rows[row][edu_col] / 16.0, 0.0, 1.0);
        double hrs = std::clamp(table.rows[row][hrs_col] / 99.0, 0.0, 1.0);
        double score = 0.5 * bracket + 0.25 * edu + 0.25 * hrs;
        double income = lo + (hi - lo) * std::clamp(score, 0.0, 1.0);
        if (noise_sd > 0.0) income += rng.normal(0.0, noise_sd);
        income = std::clamp(income, lo, hi);

        sample.individuals.push_back(make_individual(schema, table, row, income, hi));
        sample.labels.push_back(label_from_int(static_cast<int>(table.rows[row][label_col])));
    }
    sample.provenance.source = table.source;
    sample.provenance.source_hash = hex64(table.source_hash);
    sample.provenance.filter = "adult: n=" + std::to_string(n) + " balanced by " +
                               schema.group_column + ", income mapped to [" + fmt_double(lo) +
                               ", " + fmt_double(hi) + "], noise_sd=" + fmt_double(noise_sd);
    sample.provenance.dropped_missing = table.dropped_missing;
    sample.provenance.dropped_group = table.dropped_group;
    validate(sample, lo, hi);
    return sample;
}

PopulationSample prepare_compas(const RawTable& table, int max_age, int max_priors, double lo,
                                double hi) {
    if (max_age <= 0 || max_priors <= 0)
        throw InvalidInputError("prepare_compas: filters must be positive");
    const DatasetSchema schema = compas_schema();
    const std::size_t age_col = table.column_index("age");
    const std::size_t priors_col = table.column_index("priors_count");
    const std::size_t label_col = table.column_index(schema.label_column);

    PopulationSample sample;
    sample.schema = schema;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        double age = table.rows[r][age_col];
        double priors = table.rows[r][priors_col];
        if (!(age <= max_age) || !(priors < max_priors)) continue;

        // Stake proxy: youth and a clean record mean more to gain from a
        // favorable decision, for both the defendant and the public.
        double s = 0.5 * (1.0 - age / max_age) + 0.5 * (1.0 - priors / max_priors);
        double income = lo + (hi - lo) * std::clamp(s, 0.0, 1.0);

        sample.individuals.push_back(make_individual(schema, table, r, income, hi));
        sample.labels.push_back(label_from_int(static_cast<int>(table.rows[r][label_col])));
    }
    if (sample.individuals.empty())
        throw DegenerateDataError("prepare_compas: no rows satisfy age <= " +
                                  std::to_string(max_age) + " and priors < " +
                                  std::to_string(max_priors));
    sample.provenance.source = table.source;
    sample.provenance.source_hash = hex64(table.source_hash);
    sample.provenance.filter = "compas: age <= " + std::to_string(max_age) + ", priors < " +
                               std::to_string(max_priors);
    sample.provenance.dropped_missing = table.dropped_missing;
    sample.provenance.dropped_group = table.dropped_group;
    validate(sample, lo, hi);
    return sample;
}

SplitResult split(const PopulationSample& sample, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidInputError("split: train_fraction must lie in (0, 1)");

    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t i = 0; i < sample.individuals.size(); ++i)
        by_group[sample.individuals[i].group].push_back(i);

    Rng rng(derive_seed(seed, "split"));
    std::set<std::size_t> train_idx;
    for (const auto& [group, members] : by_group) {
        auto order = rng.shuffled_indices(members.size());
        auto take = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(members.size())));
        for (std::size_t k = 0; k < take; ++k) train_idx.insert(members[order[k]]);
    }

    SplitResult out;
    out.train.schema = sample.schema;
    out.test.schema = sample.schema;
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        PopulationSample& dst = train_idx.count(i) ? out.train : out.test;
        dst.individuals.push_back(sample.individuals[i]);
        dst.labels.push_back(sample.labels[i]);
    }
    auto stamp = [&](PopulationSample& part, const char* role) {
        part.provenance = sample.provenance;
        part.provenance.seed = seed;
        part.provenance.filter += std::string("; split ") + role + " fraction=" +
                                  fmt_double(train_fraction) + " seed=" + std::to_string(seed);
    };
    stamp(out.train, "train");
    stamp(out.test, "test");
    return out;
}

void validate(const SyntheticSpec& spec) {
    if (spec.size == 0) throw InvalidInputError("synthetic: size must be > 0");
    if (!(spec.income_lo < spec.income_hi))
        throw InvalidInputError("synthetic: income_lo must be < income_hi");
    if (!(spec.sd_income >= 0.0) || !(spec.feature_noise_sd >= 0.0) ||
        !(spec.label_noise_sd >= 0.0))
        throw InvalidInputError("synthetic: spreads must be >= 0");
    if (spec.group_a == spec.group_b) throw InvalidInputError("synthetic: groups must differ");
}

nlohmann::json to_json(const SyntheticSpec& s) {
    return nlohmann::json{{"size", s.size},
                          {"income_lo", s.income_lo},
                          {"income_hi", s.income_hi},
                          {"group_a", s.group_a},
                          {"group_b", s.group_b},
                          {"mean_income_a", s.mean_income_a},
                          {"mean_income_b", s.mean_income_b},
                          {"sd_income", s.sd_income},
                          {"feature_noise_sd", s.feature_noise_sd},
                          {"label_noise_sd", s.label_noise_sd},
                          {"race_aware", s.race_aware}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.size = j.value("size", s.size);
    s.income_lo = j.value("income_lo", s.income_lo);
    s.income_hi = j.value("income_hi", s.income_hi);
    s.group_a = j.value("group_a", s.group_a);
    s.group_b = j.value("group_b", s.group_b);
    s.mean_income_a = j.value("mean_income_a", s.mean_income_a);
    s.mean_income_b = j.value("mean_income_b", s.mean_income_b);
    s.sd_income = j.value("sd_income", s.sd_income);
    s.feature_noise_sd = j.value("feature_noise_sd", s.feature_noise_sd);
    s.label_noise_sd = j.value("label_noise_sd", s.label_noise_sd);
    s.race_aware = j.value("race_aware", s.race_aware);
    validate(s);
    return s;
}

PopulationSample synthesize_population(const SyntheticSpec& spec, Rng& rng) {
    validate(spec);
    DatasetSchema schema;
    schema.name = "synthetic";
    schema.feature_columns = {"solvency", "obligations"};
    if (spec.race_aware) schema.feature_columns.push_back("group");
    schema.label_column = "label";
    schema.group_column = "group";
    schema.income_column = "income";
    schema.numeric_encodings = {{"group", {{spec.group_a, 0.0}, {spec.group_b, 1.0}}}};

    PopulationSample sample;
    sample.schema = schema;
    const double mid = 0.5 * (spec.income_lo + spec.income_hi);
    const double range = spec.income_hi - spec.income_lo;
    for (std::size_t i = 0; i < spec.size; ++i) {
        const bool in_a = i % 2 == 0;
        IndividualState ind;
        ind.id = "syn-" + std::to_string(i + 1);
        ind.group = in_a ? spec.group_a : spec.group_b;
        double mean = in_a ? spec.mean_income_a : spec.mean_income_b;
        ind.income = std::clamp(rng.normal(mean, spec.sd_income), spec.income_lo,
                                spec.income_hi);
        ind.weight = ind.income / spec.income_hi;

        double z = (ind.income - mid) / range;  // [-0.5, 0.5]
        double solvency = 2.0 * z + rng.normal(0.0, spec.feature_noise_sd);
        double obligations = rng.normal(0.0, 1.0);
        ind.features.names = {"solvency", "obligations"};
        ind.features.values = {solvency, obligations};
        if (spec.race_aware) {
            ind.features.names.push_back("group");
            ind.features.values.push_back(in_a ? 0.0 : 1.0);
        }
        // Planted rule; the noise draw always happens so the stream layout
        // does not depend on label_noise_sd.
        double plant = 1.5 * solvency - 0.5 * obligations +
                       spec.label_noise_sd * rng.normal(0.0, 1.0);
        sample.labels.push_back(plant > 0.0 ? Label::positive : Label::negative);
        sample.individuals.push_back(std::move(ind));
    }
    sample.provenance.source = "synthetic";
    sample.provenance.source_hash = "-";
    sample.provenance.filter = "synthetic: size=" + std::to_string(spec.size);
    validate(sample, spec.income_lo, spec.income_hi);
    return sample;
}

std::string population_to_csv(const PopulationSample& sample) {
    std::ostringstream out;
    out << "id,group,income,weight,label";
    const std::vector<std::string>& feats =
        sample.individuals.empty() ? sample.schema.feature_columns
                                   : sample.individuals.front().features.names;
    for (const auto& f : feats) out << ',' << csv_escape(f);
    out << '\n';
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        out << csv_escape(ind.id) << ',' << csv_escape(ind.group) << ','
            << fmt_double(ind.income) << ',' << fmt_double(ind.weight) << ','
            << to_int(sample.labels[i]);
        for (double v : ind.features.values) out << ',' << fmt_double(v);
        out << '\n';
    }
    return out.str();
}

PopulationSample population_from_csv(const std::filesystem::path& path) {
    std::string text = read_file(path);
    auto cells = parse_csv(text);
    if (cells.size() < 2) throw IngestionError("population CSV has no data rows: " + path.string());
    const auto& header = cells.front();
    const std::vector<std::string> fixed = {"id", "group", "income", "weight", "label"};
    if (header.size() < fixed.size())
        throw IngestionError("population CSV header too short: " + path.string());
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (header[i] != fixed[i])
            throw IngestionError("population CSV: expected column '" + fixed[i] +
                                 "' at position " + std::to_string(i) + ", got '" + header[i] +
                                 "'");

    PopulationSample sample;
    sample.schema.name = "sample";
    sample.schema.label_column = "label";
    sample.schema.group_column = "group";
    sample.schema.income_column = "income";
    for (std::size_t c = fixed.size(); c < header.size(); ++c)
        sample.schema.feature_columns.push_back(header[c]);
    if (sample.schema.feature_columns.empty())
        throw IngestionError("population CSV has no feature columns: " + path.string());

    for (std::size_t r = 1; r < cells.size(); ++r) {
        const auto& row = cells[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size())
            throw IngestionError("population CSV row " + std::to_string(r) +
                                 ": wrong cell count");
        IndividualState ind;
        ind.id = row[0];
        ind.group = row[1];
        try {
            ind.income = std::stod(row[2]);
            ind.weight = std::stod(row[3]);
            sample.labels.push_back(label_from_int(std::stoi(row[4])));
            for (std::size_t c = fixed.size(); c < header.size(); ++c) {
                ind.features.names.push_back(header[c]);
                ind.features.values.push_back(std::stod(row[c]));
            }
        } catch (const InvalidInputError&) {
            throw;
        } catch (const std::exception&) {
            throw IngestionError("population CSV row " + std::to_string(r) +
                                 ": unparseable numeric cell");
        }
        sample.individuals.push_back(std::move(ind));
    }
    sample.provenance.source = path.string();
    sample.provenance.source_hash = hex64(fnv1a64(text));
    sample.provenance.filter = "loaded prepared sample";
    return sample;
}

nlohmann::json population_provenance_json(const PopulationSample& sample) {
    std::map<std::string, std::size_t> group_counts;
    for (const auto& ind : sample.individuals) ++group_counts[ind.group];
    return nlohmann::json{{"schema", to_json(sample.schema)},
                          {"provenance",
                           {{"source", sample.provenance.source},
                            {"source_hash", sample.provenance.source_hash},
                            {"seed", sample.provenance.seed},
                            {"filter", sample.provenance.filter},
                            {"dropped_missing", sample.provenance.dropped_missing},
                            {"dropped_group", sample.provenance.dropped_group}}},
                          {"size", sample.individuals.size()},
                          {"group_counts", group_counts}};
}

}  // namespace nwp
