#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kanids/tensor.hpp"

namespace kanids {

enum class DatasetName { UNSW_NB15, NSL_KDD, CICIDS2017, TRI_IDS, BOT_IOT };

std::string_view to_string(DatasetName name);
DatasetName parse_dataset_name(std::string_view text);

/// Column layout of a published dataset. `columns` is the accepted raw column
/// order (headerless files must follow it); `optional_columns` may be absent or
/// present in header-bearing files. raw_feature_count is the published
/// attribute count for the dataset.
struct DatasetSchema {
    DatasetName name;
    std::size_t raw_feature_count;
    std::vector<std::string> columns;
    std::vector<std::string> optional_columns;
    std::vector<std::string> categorical_columns;
    std::vector<std::string> dropped_columns;
    std::string label_column;
    std::set<std::string> normal_label_values;
    bool header_required = false;

    bool is_categorical(const std::string& column) const;
    bool is_dropped(const std::string& column) const;
};

const DatasetSchema& schema_for(DatasetName name);

struct Column {
    std::string name;
    bool categorical = false;
    std::vector<double> numeric;     // NaN marks a missing value
    std::vector<std::string> text;   // empty string marks "no category"
};

struct IngestReport {
    std::uint64_t rows_read = 0;
    std::uint64_t rows_with_missing = 0;
    std::uint64_t missing_cells = 0;
    std::uint64_t infinite_cells = 0;
    std::uint64_t unparseable_cells = 0;
    std::uint64_t positives = 0;
};

struct RawTable {
    DatasetName source = DatasetName::NSL_KDD;
    std::vector<Column> columns;
    std::vector<std::uint8_t> labels;
    std::vector<int> source_ids;  // filled by build_tri_ids, never a feature
    IngestReport report;

    std::size_t rows() const noexcept { return labels.size(); }
    const Column* find(const std::string& name) const;
    RawTable select_rows(const std::vector<std::size_t>& rows) const;
};

/// Reads a publisher CSV. Headerless files must follow schema.columns (an
/// extra trailing column, such as NSL-KDD's difficulty score, is ignored).
/// Labels are binarized: a label in normal_label_values is 0, anything else 1.
/// Empty, NaN, "?" and infinite numeric cells become missing (NaN) and are counted.
RawTable ingest_csv(const std::filesystem::path& path, const DatasetSchema& schema);

struct FeatureStats {
    double min = 0.0;
    double max = 0.0;
};

struct DatasetSplit {
    Tensor features;  // (rows, processed_dim), every value in [-1, 1]
    std::vector<std::uint8_t> labels;
    std::vector<std::string> feature_names;
    std::vector<FeatureStats> feature_stats;  // train-split statistics per output column
    std::string fingerprint;

    std::size_t rows() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return feature_names.size(); }
};

struct PreprocessedPair {
    DatasetSplit train;
    DatasetSplit test;
};

/// Fits the feature transform on `train` and applies it to both tables:
/// median imputation, min-max scaling to [-1, 1] with clipping, one-hot
/// categories (unseen test categories map to all zeros), constant columns dropped.
PreprocessedPair preprocess(const RawTable& train, const RawTable& test);

/// Stratified split of one table (test_fraction of each class) then preprocess.
PreprocessedPair preprocess(const RawTable& raw, std::uint64_t split_seed, double test_fraction = 0.2);

/// Row indices of a label-stratified split, each sorted ascending.
struct RowSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
RowSplit stratified_split(const std::vector<std::uint8_t>& labels, double test_fraction, std::uint64_t seed);

/// Label-stratified subsample of `rows` rows (all rows if fewer are available).
RawTable stratified_subsample(const RawTable& table, std::size_t rows, std::uint64_t seed);

/// One feature row -> (1, S, S) with S = ceil(sqrt(n)), zero padded row-major.
Tensor reshape_square(std::span<const double> features);

/// Stacks tables of one source with identical columns (e.g. per-day capture files).
RawTable concat(const std::vector<RawTable>& parts);

/// Canonical column name for a source column, or throws alias-map-incomplete.
std::string canonical_column(DatasetName source, const std::string& column);

/// Union-of-features merge: every source contributes a label-stratified
/// target_rows / 3 rows; columns a source lacks are 0 (numeric) or no category.
RawTable build_tri_ids(const RawTable& bot_iot, const RawTable& nsl_kdd, const RawTable& cicids,
                       std::size_t target_rows, std::uint64_t seed);

/// Binary split cache: "KANIDSD1", u64 fingerprint, u64 rows, u64 cols,
/// rows*cols little-endian float64, then one byte per label.
void write_split(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_split(const std::filesystem::path& path);

}  // namespace kanids
