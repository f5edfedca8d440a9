#include "kanids/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kanids/error.hpp"
#include "kanids/json_io.hpp"
#include "kanids/rng.hpp"

namespace kanids {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> path_list(const json& j, const fs::path& base, const char* key) {
    std::vector<fs::path> out;
    auto add = [&](const json& v) {
        require(v.is_string(), ErrorKind::ConfigParse, std::string("'") + key + "' entries must be strings");
        fs::path p = v.get<std::string>();
        out.push_back(p.is_relative() && !base.empty() ? base / p : p);
    };
    if (j.is_array())
        for (const auto& v : j) add(v);
    else
        add(j);
    return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
    require(j.is_object(), ErrorKind::ConfigParse, std::string(what) + " must be an object");
    for (const auto& [key, _] : j.items())
        require(allowed.count(key) > 0, ErrorKind::ConfigParse, std::string("unknown ") + what + " key '" + key + "'");
}

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigParse, std::string("key '") + key + "': " + e.what());
    }
}

json paths_json(const std::vector<fs::path>& paths) {
    json out = json::array();
    for (const auto& p : paths) out.push_back(p.generic_string());
    return out;
}

json report_json(const IngestReport& r) {
    return json{{"rows_read", r.rows_read},         {"rows_with_missing", r.rows_with_missing},
                {"missing_cells", r.missing_cells}, {"infinite_cells", r.infinite_cells},
                {"unparseable_cells", r.unparseable_cells}, {"positives", r.positives}};
}

RawTable read_tables(DatasetName name, const std::vector<fs::path>& files, json& ingest) {
    require(!files.empty(), ErrorKind::MissingFile, "no input files for " + std::string(to_string(name)));
    std::vector<RawTable> parts;
    for (const auto& f : files) {
        parts.push_back(ingest_csv(f, schema_for(name)));
        ingest["files"].push_back({{"path", f.generic_string()}, {"report", report_json(parts.back().report)}});
    }
    return concat(parts);
}

json balance(const DatasetSplit& s) {
    const auto pos = static_cast<std::size_t>(std::count(s.labels.begin(), s.labels.end(), 1));
    return json{{"rows", s.rows()}, {"dims", s.features.rank() == 2 ? s.features.dim(1) : 0}, {"attack", pos},
                {"normal", s.rows() - pos}};
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::MissingFile, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoFailure, "cannot write " + path.string());
    out << text;
    require(static_cast<bool>(out), ErrorKind::IoFailure, "failed writing " + path.string());
}

json subsample_json(const std::optional<SubsampleConfig>& s) {
    if (!s) return nullptr;
    return json{{"train_rows", s->train_rows}, {"test_rows", s->test_rows}, {"seed", s->seed}};
}

json dataset_json(const DatasetConfig& d) {
    json sources = json::object();
    for (const auto& [name, files] : d.sources) sources[std::string(to_string(name))] = paths_json(files);
    json j{{"name", std::string(to_string(d.name))},
           {"train", paths_json(d.train)},
           {"test", paths_json(d.test)},
           {"sources", sources},
           {"target_rows", d.target_rows},
           {"split_seed", d.split_seed},
           {"test_fraction", d.test_fraction}};
    if (!d.cache.empty()) j["cache"] = d.cache.generic_string();
    return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base) {
    check_keys(j, {"dataset", "models", "model_defaults", "train", "subsample", "output_dir", "threads"}, "config");
    ExperimentConfig c;

    require(j.contains("dataset"), ErrorKind::ConfigParse, "config needs a 'dataset' section");
    const json& d = j.at("dataset");
    check_keys(d, {"name", "train", "test", "sources", "target_rows", "split_seed", "test_fraction", "cache"},
               "dataset");
    c.dataset.name = parse_dataset_name(get_as<std::string>(d, "name"));
    if (d.contains("train")) c.dataset.train = path_list(d.at("train"), base, "train");
    if (d.contains("test")) c.dataset.test = path_list(d.at("test"), base, "test");
    if (d.contains("sources")) {
        require(d.at("sources").is_object(), ErrorKind::ConfigParse, "'sources' must be an object");
        for (const auto& [key, value] : d.at("sources").items())
            c.dataset.sources[parse_dataset_name(key)] = path_list(value, base, "sources");
    }
    if (d.contains("target_rows")) c.dataset.target_rows = get_as<std::size_t>(d, "target_rows");
    if (d.contains("split_seed")) c.dataset.split_seed = get_as<std::uint64_t>(d, "split_seed");
    if (d.contains("test_fraction")) c.dataset.test_fraction = get_as<double>(d, "test_fraction");
    if (d.contains("cache")) {
        fs::path p = get_as<std::string>(d, "cache");
        c.dataset.cache = p.is_relative() && !base.empty() ? base / p : p;
    }

    require(j.contains("models") && j.at("models").is_array() && !j.at("models").empty(), ErrorKind::ConfigParse,
            "config needs a non-empty 'models' list");
    json defaults = j.value("model_defaults", json::object());
    require(defaults.is_object() && !defaults.contains("kind"), ErrorKind::ConfigParse,
            "'model_defaults' must be an object without 'kind'");
    std::set<std::string> names;
    for (const auto& m : j.at("models")) {
        json merged = defaults;
        if (m.is_string())
            merged["kind"] = m;
        else {
            require(m.is_object(), ErrorKind::ConfigParse, "model entries must be names or objects");
            merged.update(m);
        }
        ModelSpec spec = model_spec_from_json(merged);
        require(names.insert(std::string(display_name(spec.kind))).second, ErrorKind::ConfigParse,
                "model " + std::string(display_name(spec.kind)) + " listed twice");
        c.models.push_back(spec);
    }

    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    if (j.contains("subsample") && !j.at("subsample").is_null()) {
        const json& s = j.at("subsample");
        check_keys(s, {"train_rows", "test_rows", "seed"}, "subsample");
        SubsampleConfig sub;
        if (s.contains("train_rows")) sub.train_rows = get_as<std::size_t>(s, "train_rows");
        if (s.contains("test_rows")) sub.test_rows = get_as<std::size_t>(s, "test_rows");
        if (s.contains("seed")) sub.seed = get_as<std::uint64_t>(s, "seed");
        c.subsample = sub;
    }
    if (j.contains("output_dir")) {
        fs::path p = get_as<std::string>(j, "output_dir");
        c.output_dir = p.is_relative() && !base.empty() ? base / p : p;
    }
    if (j.contains("threads")) c.threads = std::max<std::size_t>(1, get_as<std::size_t>(j, "threads"));
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    require(fs::exists(path), ErrorKind::ConfigParse, "config file not found: " + path.string());
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigParse, path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
    json models = json::array();
    for (const auto& m : c.models) models.push_back(to_json(m));
    return json{{"dataset", dataset_json(c.dataset)},
                {"models", models},
                {"train", to_json(c.train)},
                {"subsample", subsample_json(c.subsample)},
                {"output_dir", c.output_dir.generic_string()},
                {"threads", c.threads}};
}

LoadedData load_dataset(const DatasetConfig& d, const std::optional<SubsampleConfig>& subsample) {
    LoadedData out;
    if (!d.cache.empty()) {
        out.data.train = read_split(d.cache / "train.bin");
        out.data.test = read_split(d.cache / "test.bin");
        require(out.data.train.fingerprint == out.data.test.fingerprint, ErrorKind::SchemaMismatch,
                "train and test caches under " + d.cache.string() + " come from different preparations");
        const fs::path meta = d.cache / "prepare.json";
        out.ingest = fs::exists(meta) ? json::parse(read_text(meta)) : json::object();
        return out;
    }

    out.ingest = json{{"dataset", std::string(to_string(d.name))}, {"files", json::array()}};
    RawTable train, test;
    bool split_given = false;
    if (d.name == DatasetName::TRI_IDS) {
        auto source = [&](DatasetName n) {
            const auto it = d.sources.find(n);
            require(it != d.sources.end(), ErrorKind::MissingFile,
                    "Tri-IDS needs input files for " + std::string(to_string(n)));
            return read_tables(n, it->second, out.ingest);
        };
        const RawTable bot = source(DatasetName::BOT_IOT);
        const RawTable nsl = source(DatasetName::NSL_KDD);
        const RawTable cic = source(DatasetName::CICIDS2017);
        train = build_tri_ids(bot, nsl, cic, d.target_rows, d.split_seed);
    } else {
        train = read_tables(d.name, d.train, out.ingest);
        if (!d.test.empty()) {
            test = read_tables(d.name, d.test, out.ingest);
            split_given = true;
        }
    }
    if (!split_given) {
        const RowSplit rows = stratified_split(train.labels, d.test_fraction, d.split_seed);
        test = train.select_rows(rows.test);
        train = train.select_rows(rows.train);
    }
    if (subsample) {
        if (subsample->train_rows > 0) train = stratified_subsample(train, subsample->train_rows, mix64(subsample->seed));
        if (subsample->test_rows > 0) test = stratified_subsample(test, subsample->test_rows, mix64(subsample->seed + 1));
    }
    out.data = preprocess(train, test);
    out.ingest["fingerprint"] = out.data.train.fingerprint;
    out.ingest["train"] = balance(out.data.train);
    out.ingest["test"] = balance(out.data.test);
    return out;
}

PrepareResult prepare_dataset(const DatasetConfig& d, const std::optional<SubsampleConfig>& subsample,
                              const fs::path& out_dir) {
    json key{{"dataset", dataset_json(d)}, {"subsample", subsample_json(subsample)}};
    json sizes = json::array();
    auto note_sizes = [&](const std::vector<fs::path>& files) {
        for (const auto& f : files) {
            require(fs::exists(f), ErrorKind::MissingFile, f.string());
            sizes.push_back(fs::file_size(f));
        }
    };
    note_sizes(d.train);
    note_sizes(d.test);
    for (const auto& [_, files] : d.sources) note_sizes(files);
    key["sizes"] = sizes;

    PrepareResult result;
    result.directory = out_dir;
    const fs::path meta = out_dir / "prepare.json";
    if (fs::exists(meta) && fs::exists(out_dir / "train.bin") && fs::exists(out_dir / "test.bin")) {
        try {
            const json previous = json::parse(read_text(meta));
            if (previous.value("key", json()) == key) {
                result.reused = true;
                result.summary = previous;
                result.fingerprint = previous.value("fingerprint", "");
                return result;
            }
        } catch (const json::exception&) {
            // Unreadable metadata: rebuild the cache.
        }
    }

    LoadedData loaded = load_dataset(d, subsample);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    require(!ec, ErrorKind::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    write_split(loaded.data.train, out_dir / "train.bin");
    write_split(loaded.data.test, out_dir / "test.bin");
    result.summary = loaded.ingest;
    result.summary["key"] = key;
    result.summary["feature_names"] = loaded.data.train.feature_names;
    result.fingerprint = loaded.data.train.fingerprint;
    write_text(meta, result.summary.dump(2) + "\n");
    return result;
}

std::size_t thread_count(std::size_t fallback) {
    if (const char* env = std::getenv("KANIDS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, fallback);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PreprocessedPair& data, std::size_t threads,
                                std::ostream* log) {
    require(!config.models.empty(), ErrorKind::ConfigParse, "no models to run");
    const std::string dataset(to_string(config.dataset.name));
    const std::size_t dim = data.train.features.rank() == 2 ? data.train.features.dim(1) : 0;

    std::vector<RunReport> reports(config.models.size());
    std::vector<std::exception_ptr> failures(config.models.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < config.models.size(); i = next++) {
            ModelSpec spec = config.models[i];
            spec.input_dim = dim;
            RunReport& report = reports[i];
            try {
                Model model = build(spec);
                report = train_model(model, data.train, data.test, config.train);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Divergence && e.kind() != ErrorKind::NonFiniteLogit &&
                    e.kind() != ErrorKind::NonFiniteGradient) {
                    failures[i] = std::current_exception();
                    continue;
                }
                report = RunReport{};
                report.model = std::string(display_name(spec.kind));
                report.spec = spec;
                report.config = config.train;
                report.data_fingerprint = data.train.fingerprint;
                report.parameter_count = build(spec).parameter_count();
                report.diverged = true;
                report.error = e.what();
            } catch (...) {
                failures[i] = std::current_exception();
                continue;
            }
            report.dataset = dataset;
            if (log) {
                std::lock_guard lock(log_mutex);
                *log << report.model << " on " << dataset << ": "
                     << (report.diverged ? "diverged (" + report.error + ")"
                                         : "accuracy " + percent2(report.metrics.accuracy) + "%")
                     << ", " << report.parameter_count << " parameters\n";
            }
        }
    };
    const std::size_t n = std::min(std::max<std::size_t>(1, threads), config.models.size());
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    ExperimentResult result;
    result.reports = std::move(reports);
    result.any_diverged =
        std::any_of(result.reports.begin(), result.reports.end(), [](const RunReport& r) { return r.diverged; });
    result.files = emit_results(result.reports, config.output_dir);

    json files = json::array();
    auto rel = [&](const fs::path& p) { return fs::relative(p, config.output_dir).generic_string(); };
    for (const auto& p : {result.files.table, result.files.grouped_bar, result.files.radar, result.files.heatmap,
                          result.files.line, result.files.summary, result.files.timing})
        files.push_back(rel(p));
    for (const auto& p : result.files.reports) files.push_back(rel(p));
    json manifest{{"command", "run"},
                  {"config", to_json(config)},
                  {"data_fingerprint", data.train.fingerprint},
                  {"files", files},
                  {"any_diverged", result.any_diverged}};
    result.manifest = config.output_dir / "manifest.json";
    write_text(result.manifest, manifest.dump(2) + "\n");
    return result;
}

}  // namespace kanids
