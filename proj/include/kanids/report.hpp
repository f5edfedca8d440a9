#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kanids/train.hpp"

namespace kanids {

/// Percent with two decimals, as shown in the results table.
std::string percent2(double fraction);
/// Percent with six decimals, as written to the plot-data files.
std::string percent6(double fraction);

/// Model x dataset x metric table. Runtime is included only when asked for.
std::string format_table(const std::vector<RunReport>& reports, bool include_runtime);

/// Throws duplicate-run-id if two reports share (model, dataset).
void check_unique(const std::vector<RunReport>& reports);

struct EmittedFiles {
    std::filesystem::path table;        // results_table.txt (with runtime)
    std::filesystem::path grouped_bar;  // dataset,metric,model,value
    std::filesystem::path radar;        // model,dataset,axis,value
    std::filesystem::path heatmap;      // dataset,model,accuracy,precision,recall,f1
    std::filesystem::path line;         // model,dataset,epoch,loss,train_accuracy
    std::filesystem::path summary;      // summary.json keyed by dataset then model
    std::filesystem::path timing;       // timing.csv, the only wall-clock output
    std::vector<std::filesystem::path> reports;  // reports/<dataset>__<model>.json
};

/// Writes every result file under out_dir. Everything except results_table.txt
/// and timing.csv is a pure function of the reports' numeric content.
EmittedFiles emit_results(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir);

/// File-name friendly form of a display name, e.g. "KANs(2)" -> "KANs_2".
std::string slug(const std::string& text);

}  // namespace kanids
