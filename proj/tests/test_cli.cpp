#include <chrono>
#include <fstream>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using fixtures::read_file;
using fixtures::run_command;

namespace {

std::string cli() { return KANIDS_CLI_PATH; }

int run_cli(const std::string& args, const fs::path& log) {
    return run_command(cli() + " " + args + " > \"" + log.string() + "\" 2>&1");
}

void write_json(const fs::path& path, const nlohmann::json& j) { std::ofstream(path) << j.dump(2); }

// Every file a run writes except the two that carry wall-clock time.
std::map<std::string, std::string> numeric_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "results_table.txt" || rel == "timing.csv") continue;
        out[rel] = read_file(e.path());
    }
    return out;
}

}  // namespace

TEST_CASE("missing input file is a data error naming the path") {
    const auto dir = fixtures::scratch_dir("cli_missing");
    write_json(dir / "config.json", {{"dataset", {{"name", "NSL_KDD"}, {"train", {"no_such_train.txt"}}}},
                                     {"models", {"MLP2"}}});
    CHECK(run_cli("run --config \"" + (dir / "config.json").string() + "\"", dir / "log.txt") == 2);
    CHECK(read_file(dir / "log.txt").find("no_such_train.txt") != std::string::npos);

    CHECK(run_cli("prepare --dataset NSL_KDD --train \"" + (dir / "absent.csv").string() + "\" --out \"" +
                     (dir / "cache").string() + "\"",
                 dir / "log2.txt") == 2);
    CHECK(read_file(dir / "log2.txt").find("absent.csv") != std::string::npos);
}

TEST_CASE("config errors exit with 1") {
    const auto dir = fixtures::scratch_dir("cli_config");
    fixtures::write_schema_csv(dir / "nsl.txt", kanids::DatasetName::NSL_KDD, 50, {.header = false});
    write_json(dir / "empty_models.json", {{"dataset", {{"name", "NSL_KDD"}, {"train", {"nsl.txt"}}}},
                                           {"models", nlohmann::json::array()}});
    CHECK(run_cli("run --config \"" + (dir / "empty_models.json").string() + "\"", dir / "log.txt") == 1);
    CHECK(read_file(dir / "log.txt").find("config-parse-error") != std::string::npos);

    write_json(dir / "typo.json", {{"dataset", {{"name", "NSL_KDD"}, {"train", {"nsl.txt"}}}},
                                   {"models", {"MLP2"}},
                                   {"train", {{"learning_rte", 0.1}}}});
    CHECK(run_cli("run --config \"" + (dir / "typo.json").string() + "\"", dir / "log.txt") == 1);
    CHECK(run_cli("run", dir / "log.txt") == 1);
    CHECK(run_cli("frobnicate", dir / "log.txt") == 1);
}

TEST_CASE("two-model grid on a 2000-row file, twice") {
    const auto dir = fixtures::scratch_dir("cli_grid");
    fixtures::write_schema_csv(dir / "KDDTrain+.txt", kanids::DatasetName::NSL_KDD, 2000,
                               {.header = false, .missing_rate = 0.0, .infinity_rate = 0.0, .attack_share = 0.45, .seed = 11});
    write_json(dir / "config.json", {{"dataset", {{"name", "NSL_KDD"}, {"train", {"KDDTrain+.txt"}}}},
                                     {"models", {"MLP2", "KAN2"}},
                                     {"train", {{"epochs", 5}, {"learning_rate", 1e-3}}},
                                     {"output_dir", "out"}});
    const std::string cmd = "run --config \"" + (dir / "config.json").string() + "\"";

    const auto start = std::chrono::steady_clock::now();
    REQUIRE(run_cli(cmd, dir / "log1.txt") == 0);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 300.0);

    const fs::path out = dir / "out";
    for (const char* f : {"results_table.txt", "grouped_bar.csv", "radar.csv", "heatmap.csv", "line.csv",
                          "summary.json", "timing.csv", "manifest.json", "reports/NSL_KDD__MLP_2.json",
                          "reports/NSL_KDD__KANs_2.json"})
        CHECK_MESSAGE(fs::exists(out / f), f);
    const auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
    CHECK(summary.at("NSL_KDD").size() == 2);
    const auto report = nlohmann::json::parse(read_file(out / "reports/NSL_KDD__KANs_2.json"));
    CHECK(report.at("epoch_losses").size() == 5);
    CHECK_FALSE(report.contains("runtime_seconds"));

    const auto first = numeric_outputs(out);
    REQUIRE(run_cli(cmd, dir / "log2.txt") == 0);
    const auto second = numeric_outputs(out);
    CHECK(first.size() == second.size());
    for (const auto& [name, text] : first) {
        INFO(name);
        CHECK(second.count(name) == 1);
        if (second.count(name)) CHECK(second.at(name) == text);
    }

    CHECK(run_cli("report --from \"" + out.string() + "\" --out \"" + (dir / "rebuilt").string() + "\"",
                 dir / "log3.txt") == 0);
    CHECK(read_file(dir / "rebuilt" / "heatmap.csv") == read_file(out / "heatmap.csv"));
    CHECK(read_file(dir / "rebuilt" / "results_table.txt") == read_file(out / "results_table.txt"));
}

TEST_CASE("prepare reuses its cache") {
    const auto dir = fixtures::scratch_dir("cli_prepare");
    fixtures::write_schema_csv(dir / "train.txt", kanids::DatasetName::NSL_KDD, 300, {.header = false, .seed = 3});
    fixtures::write_schema_csv(dir / "test.txt", kanids::DatasetName::NSL_KDD, 100, {.header = false, .seed = 4});
    const std::string cmd = "prepare --dataset NSL_KDD --train \"" + (dir / "train.txt").string() + "\" --test \"" +
                            (dir / "test.txt").string() + "\" --out \"" + (dir / "cache").string() + "\"";
    REQUIRE(run_cli(cmd, dir / "log1.txt") == 0);
    REQUIRE(run_cli(cmd, dir / "log2.txt") == 0);
    const std::string a = read_file(dir / "log1.txt"), b = read_file(dir / "log2.txt");
    CHECK(a.find("cache written") != std::string::npos);
    CHECK(b.find("cache reused") != std::string::npos);
    const auto fp = [](const std::string& log) {
        const auto at = log.find("fingerprint: ");
        return at == std::string::npos ? std::string() : log.substr(at + 13, 16);
    };
    CHECK(fp(a).size() == 16);
    CHECK(fp(a) == fp(b));

    write_json(dir / "cached.json", {{"dataset", {{"name", "NSL_KDD"}, {"cache", "cache"}}},
                                     {"models", {"MLP2"}},
                                     {"train", {{"epochs", 1}}},
                                     {"output_dir", "out"}});
    CHECK(run_cli("run --config \"" + (dir / "cached.json").string() + "\"", dir / "log3.txt") == 0);
    const auto report = nlohmann::json::parse(read_file(dir / "out/reports/NSL_KDD__MLP_2.json"));
    CHECK(report.at("data_fingerprint") == fp(a));
}

TEST_CASE("gradcheck subcommand") {
    const auto dir = fixtures::scratch_dir("cli_gradcheck");
    CHECK(run_cli("gradcheck --seeds 3", dir / "ok.txt") == 0);
    const std::string ok = read_file(dir / "ok.txt");
    for (const char* layer : {"dense", "conv2d", "maxpool2d", "lstm", "kan_linear", "kan_linear_degree0", "conv_kan"})
        CHECK_MESSAGE(ok.find(layer) != std::string::npos, layer);
    CHECK(ok.find("FAIL") == std::string::npos);

    CHECK(run_cli("gradcheck --seeds 3 --corrupt kan_linear", dir / "bad.txt") == 4);
    CHECK(read_file(dir / "bad.txt").find("FAIL") != std::string::npos);
}

TEST_CASE("flag reference") {
    const auto dir = fixtures::scratch_dir("cli_reference");
    REQUIRE(run_cli("reference", dir / "ref.md") == 0);
    const std::string ref = read_file(dir / "ref.md");
    for (const char* flag : {"--config", "--epochs", "--lr", "--threads", "--corrupt", "--from", "--target-rows"})
        CHECK_MESSAGE(ref.find(flag) != std::string::npos, flag);
}
