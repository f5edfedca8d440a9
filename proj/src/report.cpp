#include "kanids/report.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kanids/error.hpp"
#include "kanids/json_io.hpp"

namespace kanids {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

struct MetricColumn {
    const char* name;
    double Metrics::*field;
};

constexpr MetricColumn kMetricColumns[] = {{"accuracy", &Metrics::accuracy},
                                           {"precision", &Metrics::precision},
                                           {"recall", &Metrics::recall},
                                           {"f1", &Metrics::f1}};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoFailure, "cannot open " + path.string());
    out << text;
    out.close();
    require(!out.fail(), ErrorKind::IoFailure, "failed writing " + path.string());
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string percent2(double fraction) { return fixed(100.0 * fraction, 2); }
std::string percent6(double fraction) { return fixed(100.0 * fraction, 6); }

std::string slug(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += c;
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

void check_unique(const std::vector<RunReport>& reports) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : reports)
        require(seen.emplace(r.dataset, r.model).second, ErrorKind::DuplicateRunId,
                "two runs of " + r.model + " on '" + r.dataset + "'");
}

std::string format_table(const std::vector<RunReport>& reports, bool include_runtime) {
    std::vector<std::string> header = {"Dataset", "Model", "Accuracy", "Precision", "Recall", "F1",
                                       "Macro-P", "Macro-R", "Macro-F1", "Params"};
    if (include_runtime) header.push_back("Runtime(s)");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        std::vector<std::string> row = {r.dataset,
                                        r.model,
                                        percent2(r.metrics.accuracy),
                                        percent2(r.metrics.precision),
                                        percent2(r.metrics.recall),
                                        percent2(r.metrics.f1),
                                        percent2(r.macro.precision),
                                        percent2(r.macro.recall),
                                        percent2(r.macro.f1),
                                        std::to_string(r.parameter_count)};
        if (r.diverged)
            for (std::size_t c = 2; c < 9; ++c) row[c] = "diverged";
        if (include_runtime) row.push_back(fixed(r.runtime_seconds, 2));
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "  " : "") << pad(row[c], width[c]);
        out << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : rows) emit(row);
    return out.str();
}

EmittedFiles emit_results(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir) {
    require(!reports.empty(), ErrorKind::EmptyBatch, "no run reports to emit");
    check_unique(reports);

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "reports", ec);
    require(!ec, ErrorKind::IoFailure, "cannot create " + (out_dir / "reports").string() + ": " + ec.message());

    EmittedFiles files{out_dir / "results_table.txt", out_dir / "grouped_bar.csv", out_dir / "radar.csv",
                       out_dir / "heatmap.csv",       out_dir / "line.csv",        out_dir / "summary.json",
                       out_dir / "timing.csv",        {}};

    write_file(files.table, format_table(reports, true));

    std::ostringstream bar, radar, heat, line, timing;
    bar << "dataset,metric,model,value\n";
    radar << "model,dataset,axis,value\n";
    heat << "dataset,model,accuracy,precision,recall,f1\n";
    line << "model,dataset,epoch,loss,train_accuracy\n";
    timing << "model,dataset,runtime_seconds\n";
    for (const auto& col : kMetricColumns)
        for (const auto& r : reports) bar << r.dataset << ',' << col.name << ',' << r.model << ',' << percent6(r.metrics.*col.field) << '\n';
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& r : reports) {
        heat << r.dataset << ',' << r.model;
        for (const auto& col : kMetricColumns) {
            radar << r.model << ',' << r.dataset << ',' << col.name << ',' << percent6(r.metrics.*col.field) << '\n';
            heat << ',' << percent6(r.metrics.*col.field);
        }
        heat << '\n';
        for (std::size_t e = 0; e < r.epoch_losses.size(); ++e)
            line << r.model << ',' << r.dataset << ',' << e + 1 << ',' << fixed(r.epoch_losses[e], 6) << ','
                 << fixed(e < r.epoch_train_accuracy.size() ? r.epoch_train_accuracy[e] : 0.0, 6) << '\n';
        timing << r.model << ',' << r.dataset << ',' << fixed(r.runtime_seconds, 9) << '\n';

        summary[r.dataset][r.model] = {{"metrics", to_json(r.metrics)},
                                       {"macro_metrics", to_json(r.macro)},
                                       {"confusion", to_json(r.confusion)},
                                       {"parameter_count", r.parameter_count},
                                       {"diverged", r.diverged}};

        const auto path = out_dir / "reports" / (slug(r.dataset) + "__" + slug(r.model) + ".json");
        write_file(path, to_json(r).dump(2) + "\n");
        files.reports.push_back(path);
    }
    write_file(files.grouped_bar, bar.str());
    write_file(files.radar, radar.str());
    write_file(files.heatmap, heat.str());
    write_file(files.line, line.str());
    write_file(files.summary, summary.dump(2) + "\n");
    write_file(files.timing, timing.str());
    return files;
}

}  // namespace kanids
