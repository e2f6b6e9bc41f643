// Command-line front end: runs experiments and ablations from a config
// file, generates and validates embedding files, and aggregates results
// into improvement-over-random tables.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tcm/config.hpp"
#include "tcm/datagen.hpp"
#include "tcm/error.hpp"
#include "tcm/harness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seeds_override;
    bool quiet = false;
};

int exit_code_for(const tcm::Error& e) {
    switch (e.code()) {
        case tcm::ErrorCode::Validation:
        case tcm::ErrorCode::Format:
        case tcm::ErrorCode::InvalidSpec:
        case tcm::ErrorCode::InvalidDataset:
        case tcm::ErrorCode::Io:
            return kExitValidation;
        default:
            return kExitRuntime;
    }
}

int thread_budget() {
    if (const char* env = std::getenv("TCM_AL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<int>(v);
        }
        std::cerr << "warning: ignoring invalid TCM_AL_THREADS='" << env << "'\n";
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Loads config and applies the --seeds override; prints every validation
// problem before giving up.
bool load_config(const CommonArgs& args, tcm::CliConfig& out) {
    tcm::ParseResult parsed = tcm::parse_config(args.config_path);
    if (!args.seeds_override.empty() && parsed.config.has_value()) {
        std::vector<std::uint64_t> seeds;
        std::size_t pos = 0;
        bool ok = true;
        const std::string& text = args.seeds_override;
        while (pos <= text.size()) {
            const std::size_t comma = text.find(',', pos);
            const std::string cell =
                text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            char* end = nullptr;
            const long long v = std::strtoll(cell.c_str(), &end, 10);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                ok = false;
                break;
            }
            seeds.push_back(static_cast<std::uint64_t>(v));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!ok || seeds.empty()) {
            parsed.errors.push_back("--seeds: cannot parse list '" + text + "'");
        } else {
            parsed.config->experiment.seeds = seeds;
        }
    }
    if (!parsed.errors.empty()) {
        for (const std::string& error : parsed.errors) {
            std::cerr << "config error: " << error << '\n';
        }
        return false;
    }
    out = std::move(*parsed.config);
    return true;
}

std::string prepare_out_dir(const std::string& out_dir) {
    fs::create_directories(out_dir);
    return out_dir;
}

void emit_records(const std::string& out_dir, const std::vector<tcm::RunRecord>& records) {
    const std::string csv = (fs::path(out_dir) / "records.csv").string();
    const std::string json = (fs::path(out_dir) / "records.json").string();
    tcm::write_records_csv(csv, records);
    tcm::write_records_json(json, records);
    std::cout << csv << '\n' << json << '\n';
}

int cmd_run(const CommonArgs& args) {
    tcm::CliConfig config;
    if (!load_config(args, config)) return kExitValidation;
    const int threads = thread_budget();
    if (!args.quiet) {
        std::cerr << "run: strategy=" << tcm::sampler_kind_str(config.experiment.strategy.kind)
                  << " regime=" << tcm::regime_name_str(config.experiment.regime)
                  << " seeds=" << config.experiment.seeds.size() << " threads=" << threads
                  << '\n';
    }
    const std::vector<tcm::RunRecord> records = tcm::run_experiment(config.experiment, threads);
    prepare_out_dir(args.out_dir);
    emit_records(args.out_dir, records);
    return kExitOk;
}

int cmd_ablate_transition(const CommonArgs& args) {
    tcm::CliConfig config;
    if (!load_config(args, config)) return kExitValidation;
    const int threads = thread_budget();
    if (!args.quiet) {
        std::cerr << "ablate-transition: " << config.ablation.transition_ns.size()
                  << " configured N values (0 = default sweep)\n";
    }
    const std::vector<tcm::RunRecord> records =
        tcm::run_transition_ablation(config.experiment, config.ablation.transition_ns, threads);
    prepare_out_dir(args.out_dir);
    emit_records(args.out_dir, records);
    return kExitOk;
}

int cmd_ablate_steps(const CommonArgs& args) {
    tcm::CliConfig config;
    if (!load_config(args, config)) return kExitValidation;
    const int threads = thread_budget();
    if (!args.quiet) {
        std::cerr << "ablate-steps: " << config.ablation.step_sizes.size()
                  << " configured step sizes (0 = default sweep)\n";
    }
    const std::vector<tcm::RunRecord> records =
        tcm::run_step_ablation(config.experiment, config.ablation.step_sizes, threads);
    prepare_out_dir(args.out_dir);
    emit_records(args.out_dir, records);
    return kExitOk;
}

int cmd_aggregate(const CommonArgs& args, const std::string& in_dir_flag) {
    std::string records_dir = in_dir_flag;
    tcm::AggregateGrouping grouping = tcm::AggregateGrouping::PerBudget;
    if (!args.config_path.empty()) {
        tcm::CliConfig config;
        tcm::ParseResult parsed =
            tcm::parse_config(args.config_path, /*require_experiment=*/false);
        if (!parsed.errors.empty()) {
            for (const std::string& error : parsed.errors) {
                std::cerr << "config error: " << error << '\n';
            }
            return kExitValidation;
        }
        grouping = parsed.config->aggregate.grouping;
        if (records_dir.empty()) records_dir = parsed.config->aggregate.records_dir;
    }
    if (records_dir.empty()) {
        std::cerr << "aggregate: no records directory; give --in DIR or set "
                     "[aggregate] records_dir in the config\n";
        return kExitValidation;
    }
    if (!fs::is_directory(records_dir)) {
        std::cerr << "aggregate: '" << records_dir << "' is not a directory\n";
        return kExitValidation;
    }

    // Every CSV in the directory contributes rows; aggregate outputs from
    // previous runs are skipped by name.
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(records_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".csv") continue;
        if (name.rfind("aggregate", 0) == 0) continue;
        files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<tcm::RunRecord> records;
    for (const std::string& file : files) {
        const std::vector<tcm::RunRecord> chunk = tcm::read_records_csv(file);
        records.insert(records.end(), chunk.begin(), chunk.end());
    }

    std::vector<tcm::RunRecord> baseline;
    for (const tcm::RunRecord& r : records) {
        if (r.strategy == "random") baseline.push_back(r);
    }
    if (baseline.empty()) {
        throw tcm::Error(tcm::ErrorCode::AggregationMismatch,
                         "no 'random' baseline records found in " + records_dir);
    }
    const std::vector<tcm::AggregateRecord> aggregates =
        tcm::aggregate_improvement(records, baseline, grouping);
    prepare_out_dir(args.out_dir);
    const std::string path = (fs::path(args.out_dir) / "aggregate.csv").string();
    tcm::write_aggregate_csv(path, aggregates);
    std::cout << path << '\n';
    return kExitOk;
}

int cmd_gen_data(const CommonArgs& args) {
    tcm::CliConfig config;
    if (!load_config(args, config)) return kExitValidation;
    if (!config.experiment.dataset.mixture.has_value()) {
        std::cerr << "gen-data: config must describe a synthetic dataset "
                     "(classes/per_class/dim)\n";
        return kExitValidation;
    }
    const tcm::EmbeddingDataset dataset =
        tcm::materialize_dataset(config.experiment.dataset);
    prepare_out_dir(args.out_dir);
    const std::string features = (fs::path(args.out_dir) / "features.emb").string();
    const std::string labels = (fs::path(args.out_dir) / "labels.lab").string();
    tcm::save_embeddings(dataset, features, labels);
    if (!args.quiet) {
        std::cerr << "gen-data: N=" << dataset.size() << " D=" << dataset.dim()
                  << " C=" << dataset.class_count << '\n';
    }
    std::cout << features << '\n' << labels << '\n';
    return kExitOk;
}

int cmd_validate_data(const CommonArgs& args, const std::string& features_flag,
                      const std::string& labels_flag) {
    std::string features = features_flag;
    std::string labels = labels_flag;
    if (features.empty() || labels.empty()) {
        if (args.config_path.empty()) {
            std::cerr << "validate-data: give --features/--labels or a --config with "
                         "[dataset] file paths\n";
            return kExitValidation;
        }
        tcm::CliConfig config;
        if (!load_config(args, config)) return kExitValidation;
        if (!config.experiment.dataset.features_path.has_value()) {
            std::cerr << "validate-data: config does not name feature/label files\n";
            return kExitValidation;
        }
        features = *config.experiment.dataset.features_path;
        labels = *config.experiment.dataset.labels_path;
    }
    const tcm::EmbeddingDataset dataset = tcm::load_embeddings(features, labels);
    std::cout << "N=" << dataset.size() << " D=" << dataset.dim()
              << " C=" << dataset.class_count << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-learning strategy harness over frozen embeddings"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string in_dir;
    std::string features_flag;
    std::string labels_flag;

    auto add_common = [&](CLI::App* cmd, bool need_config, bool need_out) {
        auto* config_opt = cmd->add_option("--config", args.config_path, "Config file path");
        if (need_config) config_opt->required();
        auto* out_opt = cmd->add_option("--out", args.out_dir, "Output directory");
        if (need_out) out_opt->required();
        cmd->add_option("--seeds", args.seeds_override, "Comma-separated seed override");
        cmd->add_flag("--quiet", args.quiet, "Suppress progress messages");
    };

    CLI::App* run = app.add_subcommand("run", "Run one experiment");
    add_common(run, true, true);
    CLI::App* ablate_transition =
        app.add_subcommand("ablate-transition", "Sweep the diversity->uncertainty switch point");
    add_common(ablate_transition, true, true);
    CLI::App* ablate_steps =
        app.add_subcommand("ablate-steps", "Sweep the uncertainty-phase step size");
    add_common(ablate_steps, true, true);
    CLI::App* aggregate =
        app.add_subcommand("aggregate", "Aggregate records into improvement over random");
    add_common(aggregate, false, true);
    aggregate->add_option("--in", in_dir, "Directory of records CSV files");
    CLI::App* gen_data = app.add_subcommand("gen-data", "Generate synthetic embedding files");
    add_common(gen_data, true, true);
    CLI::App* validate_data =
        app.add_subcommand("validate-data", "Check an embedding/label file pair");
    add_common(validate_data, false, false);
    validate_data->add_option("--features", features_flag, "Feature file path");
    validate_data->add_option("--labels", labels_flag, "Labels file path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(args);
        if (ablate_transition->parsed()) return cmd_ablate_transition(args);
        if (ablate_steps->parsed()) return cmd_ablate_steps(args);
        if (aggregate->parsed()) return cmd_aggregate(args, in_dir);
        if (gen_data->parsed()) return cmd_gen_data(args);
        if (validate_data->parsed()) return cmd_validate_data(args, features_flag, labels_flag);
    } catch (const tcm::Error& e) {
        std::cerr << "error (" << tcm::error_code_name(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}
