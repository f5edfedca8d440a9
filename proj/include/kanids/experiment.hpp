#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanids/data.hpp"
#include "kanids/models.hpp"
#include "kanids/report.hpp"
#include "kanids/train.hpp"

namespace kanids {

struct DatasetConfig {
    DatasetName name = DatasetName::NSL_KDD;
    std::vector<std::filesystem::path> train;  // one or more CSV files
    std::vector<std::filesystem::path> test;   // empty -> stratified split of `train`
    std::map<DatasetName, std::vector<std::filesystem::path>> sources;  // Tri-IDS inputs
    std::size_t target_rows = 60000;                                    // Tri-IDS merge size
    std::uint64_t split_seed = 42;
    double test_fraction = 0.2;
    std::filesystem::path cache;  // directory written by `prepare`; replaces the CSV inputs
};

struct SubsampleConfig {
    std::size_t train_rows = 0;  // 0 keeps every row
    std::size_t test_rows = 0;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    std::vector<ModelSpec> models;
    TrainConfig train;
    std::optional<SubsampleConfig> subsample;
    std::filesystem::path output_dir = "kanids_out";
    std::size_t threads = 1;
};

/// Relative paths are resolved against base_dir. Throws config-parse-error.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

struct LoadedData {
    PreprocessedPair data;
    nlohmann::json ingest;  // per-file ingest counts, final dims, label balance
};

/// Reads, merges, splits, subsamples and preprocesses the configured dataset,
/// or reads a prepared cache when dataset.cache is set.
LoadedData load_dataset(const DatasetConfig& dataset, const std::optional<SubsampleConfig>& subsample);

struct PrepareResult {
    std::filesystem::path directory;
    std::string fingerprint;
    bool reused = false;
    nlohmann::json summary;
};

/// Writes train.bin, test.bin and prepare.json under out_dir. When prepare.json
/// already describes the same inputs the existing cache is kept.
PrepareResult prepare_dataset(const DatasetConfig& dataset, const std::optional<SubsampleConfig>& subsample,
                              const std::filesystem::path& out_dir);

struct ExperimentResult {
    std::vector<RunReport> reports;
    EmittedFiles files;
    std::filesystem::path manifest;
    bool any_diverged = false;
};

/// Trains every configured model on `data` (up to `threads` at once), then
/// writes the result files and manifest.json under config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, const PreprocessedPair& data, std::size_t threads,
                                std::ostream* log = nullptr);

/// KANIDS_THREADS when set to a positive integer, otherwise `fallback`.
std::size_t thread_count(std::size_t fallback);

}  // namespace kanids
