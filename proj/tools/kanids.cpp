// kanids: prepare intrusion-detection datasets, train the model grid, check
// gradients and re-emit result tables.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kanids/error.hpp"
#include "kanids/experiment.hpp"
#include "kanids/gradcheck.hpp"
#include "kanids/json_io.hpp"
#include "kanids/report.hpp"

namespace fs = std::filesystem;
using namespace kanids;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kDiverged = 3, kGradcheckFailed = 4 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingFile:
        case ErrorKind::EmptyFile:
        case ErrorKind::SchemaMismatch:
        case ErrorKind::SingleClassDataset:
        case ErrorKind::AliasMapIncomplete:
        case ErrorKind::IoFailure:
        case ErrorKind::EmptyBatch:
            return kData;
        case ErrorKind::Divergence:
        case ErrorKind::NonFiniteLogit:
        case ErrorKind::NonFiniteGradient:
            return kDiverged;
        default:
            return kUsage;
    }
}

struct DatasetFlags {
    std::string config;
    std::string dataset;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::vector<std::string> sources;  // NAME=PATH
    std::optional<std::size_t> target_rows;
    std::optional<std::uint64_t> split_seed;
    std::optional<double> test_fraction;
    std::optional<std::size_t> train_rows;
    std::optional<std::size_t> test_rows;
    std::optional<std::uint64_t> subsample_seed;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
    cmd->add_option("--dataset", f.dataset, "NSL_KDD, UNSW_NB15, CICIDS2017, BOT_IOT or TRI_IDS");
    cmd->add_option("--train", f.train, "training CSV file(s)");
    cmd->add_option("--test", f.test, "test CSV file(s); omitted -> stratified split of --train");
    cmd->add_option("--source", f.sources, "Tri-IDS input as NAME=PATH, repeatable");
    cmd->add_option("--target-rows", f.target_rows, "Tri-IDS merged row count");
    cmd->add_option("--split-seed", f.split_seed, "seed of the train/test split");
    cmd->add_option("--test-fraction", f.test_fraction, "test share when splitting one table");
    cmd->add_option("--train-rows", f.train_rows, "stratified training subsample size");
    cmd->add_option("--test-rows", f.test_rows, "stratified test subsample size");
    cmd->add_option("--subsample-seed", f.subsample_seed, "seed of the subsample");
}

void apply_dataset_flags(const DatasetFlags& f, ExperimentConfig& c) {
    if (!f.dataset.empty()) c.dataset.name = parse_dataset_name(f.dataset);
    if (!f.train.empty()) c.dataset.train.assign(f.train.begin(), f.train.end());
    if (!f.test.empty()) c.dataset.test.assign(f.test.begin(), f.test.end());
    for (const auto& s : f.sources) {
        const auto eq = s.find('=');
        require(eq != std::string::npos, ErrorKind::ConfigParse, "--source expects NAME=PATH, got '" + s + "'");
        c.dataset.sources[parse_dataset_name(s.substr(0, eq))].push_back(s.substr(eq + 1));
    }
    if (f.target_rows) c.dataset.target_rows = *f.target_rows;
    if (f.split_seed) c.dataset.split_seed = *f.split_seed;
    if (f.test_fraction) c.dataset.test_fraction = *f.test_fraction;
    if (f.train_rows || f.test_rows || f.subsample_seed) {
        SubsampleConfig s = c.subsample.value_or(SubsampleConfig{});
        if (f.train_rows) s.train_rows = *f.train_rows;
        if (f.test_rows) s.test_rows = *f.test_rows;
        if (f.subsample_seed) s.seed = *f.subsample_seed;
        c.subsample = s;
    }
}

ExperimentConfig base_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return load_experiment_config(path);
}

std::string reference(CLI::App& app) {
    std::ostringstream out;
    out << "# kanids command-line reference\n\n"
        << "Generated by `kanids reference`.\n\n"
        << "Exit codes: 0 success, 1 usage or config error, 2 data error, 3 divergence, 4 gradient check failure.\n"
        << "`KANIDS_THREADS` overrides the number of models trained in parallel.\n";
    for (const auto* sub : app.get_subcommands({})) {
        out << "\n## " << sub->get_name() << "\n\n" << sub->get_description() << "\n\n";
        out << "| flag | description |\n|---|---|\n";
        for (const auto* opt : sub->get_options()) {
            if (opt->get_name() == "--help,-h") continue;
            std::string name = opt->get_name(false, true);
            out << "| `" << name << "` | " << opt->get_description()
                << (opt->get_required() ? " (required)" : "") << " |\n";
        }
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spline-edge and baseline intrusion-detection benchmark"};
    app.require_subcommand(1);

    DatasetFlags prep_flags;
    std::string prep_out;
    auto* prepare = app.add_subcommand("prepare", "Ingest, split and preprocess a dataset into a cached split");
    prepare->add_option("--config", prep_flags.config, "experiment config (JSON); flags override it");
    add_dataset_flags(prepare, prep_flags);
    prepare->add_option("--out", prep_out, "cache directory")->required();

    std::string run_config, run_out, run_cache;
    std::vector<std::string> run_models;
    std::optional<std::size_t> run_epochs, run_batch, run_threads;
    std::optional<double> run_lr;
    std::optional<std::uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "Train and evaluate every model of a config on one dataset");
    run->add_option("--config", run_config, "experiment config (JSON)")->required();
    run->add_option("--out", run_out, "output directory (overrides output_dir)");
    run->add_option("--cache", run_cache, "prepared cache directory (overrides dataset inputs)");
    run->add_option("--models", run_models, "model list, e.g. MLP2,KAN2 (overrides models)")->delimiter(',');
    run->add_option("--epochs", run_epochs, "training epochs");
    run->add_option("--lr", run_lr, "learning rate");
    run->add_option("--batch-size", run_batch, "mini-batch size");
    run->add_option("--seed", run_seed, "shuffling seed");
    run->add_option("--threads", run_threads, "models trained in parallel");

    GradcheckOptions grad_options;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer's backward pass");
    gradcheck->add_option("--seeds", grad_options.seeds, "random seeds per layer");
    gradcheck->add_option("--tolerance", grad_options.tolerance, "largest accepted relative error");
    gradcheck->add_option("--corrupt", grad_options.corrupt, "test hook: corrupt this layer's analytic gradient");

    std::string report_from, report_out;
    auto* report = app.add_subcommand("report", "Rebuild result tables from the run reports of a previous run");
    report->add_option("--from", report_from, "output directory of a previous run")->required();
    report->add_option("--out", report_out, "where to write the tables (default: --from)");

    auto* ref = app.add_subcommand("reference", "Print this flag reference as Markdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*prepare) {
            ExperimentConfig c = base_config(prep_flags.config);
            apply_dataset_flags(prep_flags, c);
            const PrepareResult r = prepare_dataset(c.dataset, c.subsample, prep_out);
            std::cout << (r.reused ? "cache reused: " : "cache written: ") << r.directory.string() << "\n"
                      << "fingerprint: " << r.fingerprint << "\n"
                      << r.summary.dump(2) << "\n";
            return kOk;
        }
        if (*run) {
            ExperimentConfig c = load_experiment_config(run_config);
            if (!run_out.empty()) c.output_dir = run_out;
            if (!run_cache.empty()) c.dataset.cache = run_cache;
            if (!run_models.empty()) {
                c.models.clear();
                for (const auto& m : run_models) {
                    ModelSpec spec;
                    spec.kind = parse_model_kind(m);
                    c.models.push_back(spec);
                }
            }
            if (run_epochs) c.train.epochs = *run_epochs;
            if (run_lr) c.train.learning_rate = *run_lr;
            if (run_batch) c.train.batch_size = *run_batch;
            if (run_seed) c.train.seed = *run_seed;
            if (run_threads) c.threads = *run_threads;
            validate(c.train);

            const LoadedData loaded = load_dataset(c.dataset, c.subsample);
            const ExperimentResult result = run_experiment(c, loaded.data, thread_count(c.threads), &std::cerr);
            std::cout << format_table(result.reports, true) << "results: " << c.output_dir.string() << "\n";
            return result.any_diverged ? kDiverged : kOk;
        }
        if (*gradcheck) {
            const auto cases = run_gradcheck(grad_options);
            std::cout << format_gradcheck(cases);
            const bool ok = std::all_of(cases.begin(), cases.end(), [](const GradcheckCase& c) { return c.passed; });
            return ok ? kOk : kGradcheckFailed;
        }
        if (*report) {
            std::vector<RunReport> reports;
            std::vector<fs::path> files;
            const fs::path dir = fs::path(report_from) / "reports";
            require(fs::is_directory(dir), ErrorKind::MissingFile, dir.string());
            // Keep the original run order when the manifest is there.
            if (std::ifstream m(fs::path(report_from) / "manifest.json"); m) {
                const auto manifest = nlohmann::json::parse(m);
                for (const auto& f : manifest.at("files"))
                    if (f.get<std::string>().starts_with("reports/")) files.push_back(fs::path(report_from) / f.get<std::string>());
            } else {
                for (const auto& e : fs::directory_iterator(dir))
                    if (e.path().extension() == ".json") files.push_back(e.path());
                std::sort(files.begin(), files.end());
            }
            for (const auto& f : files) {
                std::ifstream in(f);
                reports.push_back(run_report_from_json(nlohmann::json::parse(in)));
            }
            require(!reports.empty(), ErrorKind::MissingFile, "no run reports under " + dir.string());
            // Wall-clock times live only in timing.csv.
            std::ifstream timing(fs::path(report_from) / "timing.csv");
            std::string line;
            std::getline(timing, line);
            while (std::getline(timing, line)) {
                const auto a = line.find(','), b = line.rfind(',');
                if (a == std::string::npos || a == b) continue;
                for (auto& r : reports)
                    if (r.model == line.substr(0, a) && r.dataset == line.substr(a + 1, b - a - 1))
                        r.runtime_seconds = std::stod(line.substr(b + 1));
            }
            emit_results(reports, report_out.empty() ? fs::path(report_from) : fs::path(report_out));
            std::cout << format_table(reports, false);
            return kOk;
        }
        if (*ref) {
            std::cout << reference(app);
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "kanids: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "kanids: config-parse-error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "kanids: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
