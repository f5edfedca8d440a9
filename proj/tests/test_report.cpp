#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "kanids/json_io.hpp"
#include "kanids/report.hpp"

using namespace kanids;
using fixtures::error_kind;

namespace {

RunReport fake_report(ModelKind kind, const std::string& dataset, std::uint64_t seed) {
    Rng rng(seed);
    RunReport r;
    r.model = std::string(display_name(kind));
    r.dataset = dataset;
    r.spec.kind = kind;
    r.confusion = {100 + rng.below(900), 100 + rng.below(900), rng.below(200), rng.below(200)};
    r.metrics = metrics(r.confusion);
    r.macro = macro_metrics(r.confusion);
    r.parameter_count = 1000 + rng.below(50000);
    r.epoch_losses = {0.7, 0.5, 0.4};
    r.epoch_train_accuracy = {0.6, 0.8, 0.85};
    r.runtime_seconds = 1.0 + static_cast<double>(seed);
    return r;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

std::vector<std::string> words(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

}  // namespace

TEST_CASE("percent formatting") {
    CHECK(percent2(0.9405) == "94.05");
    CHECK(percent2(1.0) == "100.00");
    CHECK(percent6(2.0 / 3.0) == "66.666667");
    CHECK(slug("KANs(2)") == "KANs_2");
    CHECK(slug("KAN-LSTM") == "KAN_LSTM");
}

TEST_CASE("single report table") {
    const RunReport r = fake_report(ModelKind::KAN_LSTM, "NSL_KDD", 1);
    const std::string table = format_table({r}, true);
    const auto lines = split(table, '\n');
    REQUIRE(lines.size() == 3);
    const auto cells = words(lines[2]);
    REQUIRE(cells.size() == 11);
    CHECK(cells[0] == "NSL_KDD");
    CHECK(cells[1] == "KAN-LSTM");
    CHECK(cells[2] == percent2(r.metrics.accuracy));
    CHECK(cells[3] == percent2(r.metrics.precision));
    CHECK(cells[4] == percent2(r.metrics.recall));
    CHECK(cells[5] == percent2(r.metrics.f1));
    CHECK(cells[9] == std::to_string(r.parameter_count));
    CHECK(cells[10] == "2.00");
    CHECK(words(split(format_table({r}, false), '\n')[2]).size() == 10);
}

TEST_CASE("duplicate runs are rejected") {
    const RunReport a = fake_report(ModelKind::MLP2, "NSL_KDD", 1);
    RunReport b = fake_report(ModelKind::MLP2, "NSL_KDD", 2);
    CHECK(error_kind([&] { check_unique({a, b}); }) == ErrorKind::DuplicateRunId);
    const auto dir = fixtures::scratch_dir("dup");
    CHECK(error_kind([&] { emit_results({a, b}, dir); }) == ErrorKind::DuplicateRunId);
    b.dataset = "UNSW_NB15";
    CHECK_NOTHROW(check_unique({a, b}));
    CHECK(error_kind([&] { emit_results({}, dir); }) == ErrorKind::EmptyBatch);
}

TEST_CASE("heatmap cells match the table") {
    std::vector<RunReport> reports;
    std::uint64_t seed = 10;
    for (ModelKind kind : kAllModelKinds) reports.push_back(fake_report(kind, "NSL_KDD", seed++));
    const auto dir = fixtures::scratch_dir("heatmap");
    const EmittedFiles files = emit_results(reports, dir);
    CHECK(files.reports.size() == 8);

    std::map<std::string, std::vector<std::string>> table_rows;
    const auto table_lines = split(fixtures::read_file(files.table), '\n');
    for (std::size_t i = 2; i < table_lines.size(); ++i) {
        const auto cells = words(table_lines[i]);
        table_rows[cells[1]] = cells;
    }
    REQUIRE(table_rows.size() == 8);

    const auto heat = split(fixtures::read_file(files.heatmap), '\n');
    REQUIRE(heat.size() == 9);
    CHECK(heat[0] == "dataset,model,accuracy,precision,recall,f1");
    std::size_t cells_checked = 0;
    for (std::size_t i = 1; i < heat.size(); ++i) {
        const auto f = split(heat[i], ',');
        REQUIRE(f.size() == 6);
        const auto& row = table_rows.at(f[1]);
        const auto& rep = *std::find_if(reports.begin(), reports.end(), [&](const RunReport& r) { return r.model == f[1]; });
        const double expected[4] = {rep.metrics.accuracy, rep.metrics.precision, rep.metrics.recall, rep.metrics.f1};
        for (std::size_t m = 0; m < 4; ++m) {
            const double value = std::stod(f[2 + m]);
            CHECK(f[2 + m].substr(f[2 + m].find('.') + 1).size() == 6);
            CHECK(std::abs(value - 100.0 * expected[m]) <= 5e-7);
            CHECK(row[2 + m] == percent2(expected[m]));
            CHECK(std::abs(std::stod(row[2 + m]) - value) <= 0.005 + 1e-9);
            ++cells_checked;
        }
    }
    CHECK(cells_checked == 32);

    const auto summary = nlohmann::json::parse(fixtures::read_file(files.summary));
    CHECK(summary.at("NSL_KDD").size() == 8);
    CHECK(summary.at("NSL_KDD").at("KAN-LSTM").at("parameter_count") == reports.back().parameter_count);

    const auto lines = split(fixtures::read_file(files.line), '\n');
    CHECK(lines.size() == 1 + 8 * 3);

    const auto back = run_report_from_json(nlohmann::json::parse(fixtures::read_file(files.reports.front())));
    CHECK(back.confusion == reports.front().confusion);
    CHECK(back.metrics == reports.front().metrics);
}
