#include "nwp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "nwp/errors.hpp"
#include "nwp/io.hpp"
#include "nwp/metrics.hpp"

namespace nwp {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_path, const std::vector<std::string>& inputs,
                    std::uint64_t seed, const std::vector<std::string>& artifacts,
                    const std::string& started) {
    nlohmann::json listed = nlohmann::json::array();
    for (const auto& name : artifacts) {
        fs::path p = out_dir / name;
        if (!fs::exists(p)) throw std::runtime_error("manifest: missing artifact " + p.string());
        listed.push_back({{"path", name}, {"fnv1a64", hex64(hash_file(p))}});
    }
    nlohmann::json manifest{{"command", command},
                            {"config_path", config_path},
                            {"input_paths", inputs},
                            {"output_dir", out_dir.string()},
                            {"seed", seed},
                            {"started_at", started},
                            {"finished_at", utc_timestamp()},
                            {"artifacts", listed}};
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

PopulationSample obtain_population(const RunConfig& config, const std::string& data_path,
                                   bool synthetic, std::uint64_t seed) {
    if (synthetic) {
        SyntheticSpec spec = config.synthetic;
        spec.size = std::max(spec.size, config.sim.population_size);
        spec.income_lo = config.sim.income_lo;
        spec.income_hi = config.sim.income_hi;
        Rng rng(derive_seed(seed, "data"));
        PopulationSample sample = synthesize_population(spec, rng);
        sample.provenance.seed = seed;
        return sample;
    }
    return population_from_csv(data_path);
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const IngestionError*>(&e)) return 2;
    if (dynamic_cast<const DegenerateDataError*>(&e)) return 2;
    return 3;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

void ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw ConfigError("output directory must be given");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config '" + path.string() + "': " + e.what());
    }
    RunConfig config;
    config.sim = simulation_config_from_json(j);
    try {
        if (j.contains("synthetic"))
            config.synthetic = synthetic_spec_from_json(j.at("synthetic"));
        if (j.contains("compare")) {
            const auto& c = j.at("compare");
            config.compare.mode = c.value("mode", config.compare.mode);
            config.compare.splits = c.value("splits", config.compare.splits);
            config.compare.train_fraction =
                c.value("train_fraction", config.compare.train_fraction);
            config.compare.baseline_method =
                c.value("baseline_method", config.compare.baseline_method);
        }
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config section: ") + e.what());
    }
    if (config.compare.mode != "splits" && config.compare.mode != "epochs")
        throw ConfigError("compare.mode must be 'splits' or 'epochs'");
    if (config.compare.splits < 1) throw ConfigError("compare.splits must be >= 1");
    if (!(config.compare.train_fraction > 0.0 && config.compare.train_fraction < 1.0))
        throw ConfigError("compare.train_fraction must lie in (0, 1)");
    return config;
}

int cmd_simulate(const SimulateArgs& args) {
    return guarded([&] {
        if (args.synthetic == !args.data_path.empty())
            throw ConfigError("exactly one of --data and --synthetic must be given");
        RunConfig config = load_run_config(args.config_path);
        if (args.seed) config.sim.seed = *args.seed;
        DecisionMethod method = method_from_string(args.method);
        ensure_out_dir(args.out_dir);
        const std::string started = utc_timestamp();

        PopulationSample sample =
            obtain_population(config, args.data_path, args.synthetic, config.sim.seed);
        SimulationTrace trace = run_simulation(config.sim, sample, method);

        fs::path out = args.out_dir;
        write_file(out / "trace.json", to_json(trace).dump(2) + "\n");
        write_file(out / "epochs.csv", trace_epochs_csv(trace));
        write_file(out / "decisions.csv", trace_decisions_csv(trace));
        for (const auto& rec : trace.epochs) {
            WelfarePoint p = welfare_point(rec);
            std::cout << "epoch=" << rec.epoch << " log_nwp=" << fmt_double(p.log_nwp)
                      << " mean_weight=" << fmt_double(p.mean_weight)
                      << " weight_gini=" << fmt_double(p.weight_gini)
                      << " combined_error=" << fmt_double(rec.error.combined) << "\n";
        }
        std::vector<std::string> inputs;
        if (!args.data_path.empty()) inputs.push_back(args.data_path);
        write_manifest(out, "simulate", args.config_path, inputs, config.sim.seed,
                       {"trace.json", "epochs.csv", "decisions.csv"}, started);
        for (const char* name : {"trace.json", "epochs.csv", "decisions.csv", "manifest.json"})
            std::cout << "artifact=" << (out / name).string() << "\n";
        std::cout << "status=ok\n";
        return 0;
    });
}

namespace {

std::vector<MethodSeries> compare_splits(const RunConfig& config,
                                         const PopulationSample& sample,
                                         const std::vector<DecisionMethod>& methods) {
    std::vector<MethodSeries> series(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m)
        series[m].method = to_string(methods[m]);

    for (int k = 1; k <= config.compare.splits; ++k) {
        std::uint64_t split_seed =
            derive_seed(config.sim.seed, "split-" + std::to_string(k));
        SplitResult parts = split(sample, config.compare.train_fraction, split_seed);

        std::vector<LabeledPoint> training;
        training.reserve(parts.train.individuals.size());
        for (std::size_t i = 0; i < parts.train.individuals.size(); ++i)
            training.push_back({parts.train.individuals[i].features, parts.train.labels[i]});
        TrainedClassifier model = train(training, config.sim.classifier);

        for (std::size_t m = 0; m < methods.size(); ++m) {
            std::uint64_t method_seed = derive_seed(config.sim.seed, series[m].method);
            Rng ceo_rng(derive_seed(method_seed, "mix-split-" + std::to_string(k)));
            CeoContext ceo;
            const CeoContext* ceo_ptr = nullptr;
            if (methods[m] == DecisionMethod::ceo) {
                ceo = fit_ceo(model, parts.train);
                ceo_ptr = &ceo;
            }
            SupervisedEval eval = evaluate_supervised(config.sim, model, parts.test,
                                                      methods[m], ceo_ptr, ceo_rng);
            series[m].rates.push_back(eval.error);
        }
    }
    return series;
}

std::vector<MethodSeries> compare_epochs(const RunConfig& config,
                                         const PopulationSample& sample,
                                         const std::vector<DecisionMethod>& methods) {
    std::vector<MethodSeries> series;
    for (DecisionMethod method : methods) {
        SimulationConfig cfg = config.sim;
        cfg.seed = derive_seed(config.sim.seed, to_string(method));
        SimulationTrace trace = run_simulation(cfg, sample, method);
        MethodSeries s;
        s.method = to_string(method);
        for (const auto& rec : trace.epochs) {
            s.rates.push_back(rec.error);
            s.welfare.push_back(welfare_point(rec));
        }
        series.push_back(std::move(s));
    }
    return series;
}

}  // namespace

int cmd_compare(const CompareArgs& args) {
    return guarded([&] {
        if (args.synthetic == !args.data_path.empty())
            throw ConfigError("exactly one of --data and --synthetic must be given");
        if (args.methods.size() < 2)
            throw ConfigError("compare needs at least 2 methods (have " +
                              std::to_string(args.methods.size()) + ")");
        std::set<std::string> unique(args.methods.begin(), args.methods.end());
        if (unique.size() != args.methods.size())
            throw ConfigError("compare: duplicate method names");

        RunConfig config = load_run_config(args.config_path);
        if (args.seed) config.sim.seed = *args.seed;
        std::vector<DecisionMethod> methods;
        for (const auto& name : args.methods) methods.push_back(method_from_string(name));
        ensure_out_dir(args.out_dir);
        const std::string started = utc_timestamp();

        PopulationSample sample =
            obtain_population(config, args.data_path, args.synthetic, config.sim.seed);

        const bool split_mode = config.compare.mode == "splits";
        std::vector<MethodSeries> series = split_mode
                                               ? compare_splits(config, sample, methods)
                                               : compare_epochs(config, sample, methods);
        ComparisonReport report = build_report(series, config.compare.baseline_method,
                                               split_mode ? "split" : "epoch");

        fs::path out = args.out_dir;
        write_file(out / "report.json", to_json(report).dump(2) + "\n");
        write_file(out / "report.csv", report_to_csv(report));
        for (const auto& row : report.rows)
            std::cout << "method=" << row.method << " " << report.index_kind << "="
                      << row.index << " combined=" << fmt_double(row.rates.combined) << "\n";
        std::vector<std::string> inputs;
        if (!args.data_path.empty()) inputs.push_back(args.data_path);
        write_manifest(out, "compare", args.config_path, inputs, config.sim.seed,
                       {"report.json", "report.csv"}, started);
        for (const char* name : {"report.json", "report.csv", "manifest.json"})
            std::cout << "artifact=" << (out / name).string() << "\n";
        std::cout << "status=ok\n";
        return 0;
    });
}

int cmd_prepare(const PrepareArgs& args) {
    return guarded([&] {
        ensure_out_dir(args.out_dir);
        const std::string started = utc_timestamp();

        PopulationSample sample;
        std::vector<std::string> inputs;
        if (args.dataset == "adult" || args.dataset == "compas") {
            if (args.input_path.empty())
                throw ConfigError("--input is required for dataset '" + args.dataset + "'");
            DatasetSchema schema;
            if (!args.schema_path.empty()) {
                try {
                    schema = schema_from_json(nlohmann::json::parse(read_file(args.schema_path)));
                } catch (const IngestionError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw ConfigError("bad schema file '" + args.schema_path + "': " + e.what());
                }
            } else {
                schema = args.dataset == "adult" ? adult_schema() : compas_schema();
            }
            if (!args.balance.empty() && args.balance != schema.group_column)
                throw ConfigError("--balance must name the schema group column ('" +
                                  schema.group_column + "')");
            RawTable table = load_csv(args.input_path, schema);
            inputs.push_back(args.input_path);
            if (args.dataset == "adult") {
                Rng rng(derive_seed(args.seed, "data"));
                sample = prepare_adult(table, args.n, args.income_lo, args.income_hi,
                                       args.noise_sd, rng);
            } else {
                sample = prepare_compas(table, args.max_age, args.max_priors, args.income_lo,
                                        args.income_hi);
            }
            sample.provenance.seed = args.seed;
        } else if (args.dataset == "synthetic") {
            SyntheticSpec spec;
            spec.size = args.n;
            spec.income_lo = args.income_lo;
            spec.income_hi = args.income_hi;
            Rng rng(derive_seed(args.seed, "data"));
            sample = synthesize_population(spec, rng);
            sample.provenance.seed = args.seed;
        } else {
            throw ConfigError("unknown dataset '" + args.dataset +
                              "' (expected adult, compas, or synthetic)");
        }

        fs::path out = args.out_dir;
        write_file(out / "sample.csv", population_to_csv(sample));
        write_file(out / "sample.json", population_provenance_json(sample).dump(2) + "\n");
        std::cout << "rows=" << sample.individuals.size()
                  << " dropped_missing=" << sample.provenance.dropped_missing
                  << " dropped_group=" << sample.provenance.dropped_group << "\n";
        write_manifest(out, "prepare", "", inputs, args.seed, {"sample.csv", "sample.json"},
                       started);
        for (const char* name : {"sample.csv", "sample.json", "manifest.json"})
            std::cout << "artifact=" << (out / name).string() << "\n";
        std::cout << "status=ok\n";
        return 0;
    });
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Nash-welfare post-processing fairness simulator"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run the multi-epoch lending simulation");
    sim->add_option("--config", sim_args.config_path, "Run config JSON")->required();
    sim->add_option("--data", sim_args.data_path, "Prepared population sample CSV");
    sim->add_flag("--synthetic", sim_args.synthetic, "Synthesize the population");
    sim->add_option("--out", sim_args.out_dir, "Output directory")->required();
    std::uint64_t sim_seed = 0;
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Override the config seed");
    sim->add_option("--method", sim_args.method, "Decision method: nwp, ceo, or none");

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "Evaluate methods side by side");
    cmp->add_option("--config", cmp_args.config_path, "Run config JSON")->required();
    cmp->add_option("--data", cmp_args.data_path, "Prepared population sample CSV");
    cmp->add_flag("--synthetic", cmp_args.synthetic, "Synthesize the population");
    cmp->add_option("--out", cmp_args.out_dir, "Output directory")->required();
    std::uint64_t cmp_seed = 0;
    auto* cmp_seed_opt = cmp->add_option("--seed", cmp_seed, "Override the config seed");
    cmp->add_option("--methods", cmp_args.methods, "Methods to compare (nwp, ceo, none)")
        ->delimiter(',');

    PrepareArgs prep_args;
    auto* prep = app.add_subcommand("prepare", "Ingest and preprocess a dataset");
    prep->add_option("--dataset", prep_args.dataset, "adult, compas, or synthetic")->required();
    prep->add_option("--input", prep_args.input_path, "Raw CSV input");
    prep->add_option("--schema", prep_args.schema_path, "Schema JSON override");
    prep->add_option("--out", prep_args.out_dir, "Output directory")->required();
    prep->add_option("--n", prep_args.n, "Sample size");
    prep->add_option("--balance", prep_args.balance, "Column to balance on");
    prep->add_option("--max-age", prep_args.max_age, "COMPAS: keep age <= this");
    prep->add_option("--max-priors", prep_args.max_priors, "COMPAS: keep priors < this");
    prep->add_option("--income-lo", prep_args.income_lo, "Income range low end");
    prep->add_option("--income-hi", prep_args.income_hi, "Income range high end");
    prep->add_option("--noise-sd", prep_args.noise_sd, "Income noise sd (adult)");
    prep->add_option("--seed", prep_args.seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (sim->parsed()) {
        if (!sim_seed_opt->empty()) sim_args.seed = sim_seed;
        return cmd_simulate(sim_args);
    }
    if (cmp->parsed()) {
        if (!cmp_seed_opt->empty()) cmp_args.seed = cmp_seed;
        return cmd_compare(cmp_args);
    }
    return cmd_prepare(prep_args);
}

}  // namespace nwp
