#include "kanids/json_io.hpp"

#include <set>

#include "kanids/error.hpp"

namespace kanids {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
    require(j.is_object(), ErrorKind::ConfigParse, std::string(what) + " must be an object");
    for (const auto& [key, _] : j.items())
        require(allowed.count(key) > 0, ErrorKind::ConfigParse, std::string("unknown ") + what + " key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigParse, std::string("key '") + key + "': " + e.what());
    }
}

void read_size(const json& j, const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::ConfigParse,
            std::string("key '") + key + "' must be a non-negative integer");
    out = v.get<std::size_t>();
}

}  // namespace

json to_json(const ModelSpec& s) {
    return json{{"kind", std::string(to_token(s.kind))},
                {"input_dim", s.input_dim},
                {"hidden_width", s.hidden_width},
                {"grid_size", s.grid_size},
                {"spline_degree", s.spline_degree},
                {"grid_lo", s.grid_lo},
                {"grid_hi", s.grid_hi},
                {"seed", s.seed},
                {"lstm_hidden", s.lstm_hidden},
                {"cnn_channels", s.cnn_channels},
                {"convkan_channels", s.convkan_channels}};
}

ModelSpec model_spec_from_json(const json& j) {
    if (j.is_string()) {
        ModelSpec s;
        s.kind = parse_model_kind(j.get<std::string>());
        return s;
    }
    reject_unknown(j,
                   {"kind", "input_dim", "hidden_width", "grid_size", "spline_degree", "grid_lo", "grid_hi", "seed",
                    "lstm_hidden", "cnn_channels", "convkan_channels"},
                   "model");
    ModelSpec s;
    std::string kind;
    read(j, "kind", kind);
    require(!kind.empty(), ErrorKind::ConfigParse, "model entry needs a 'kind'");
    try {
        s.kind = parse_model_kind(kind);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigParse, e.what());
    }
    read_size(j, "input_dim", s.input_dim);
    read_size(j, "hidden_width", s.hidden_width);
    read(j, "grid_size", s.grid_size);
    read(j, "spline_degree", s.spline_degree);
    read(j, "grid_lo", s.grid_lo);
    read(j, "grid_hi", s.grid_hi);
    read(j, "seed", s.seed);
    read_size(j, "lstm_hidden", s.lstm_hidden);
    read(j, "cnn_channels", s.cnn_channels);
    read(j, "convkan_channels", s.convkan_channels);
    return s;
}

json to_json(const TrainConfig& c) {
    return json{{"learning_rate", c.learning_rate}, {"epochs", c.epochs},       {"batch_size", c.batch_size},
                {"weight_decay", c.weight_decay},   {"beta1", c.beta1},         {"beta2", c.beta2},
                {"eps", c.eps},                     {"seed", c.seed},           {"prob_clamp", c.prob_clamp},
                {"clip_norm", c.clip_norm}};
}

TrainConfig train_config_from_json(const json& j) {
    reject_unknown(j,
                   {"learning_rate", "epochs", "batch_size", "weight_decay", "beta1", "beta2", "eps", "seed",
                    "prob_clamp", "clip_norm"},
                   "train");
    TrainConfig c;
    read(j, "learning_rate", c.learning_rate);
    read_size(j, "epochs", c.epochs);
    read_size(j, "batch_size", c.batch_size);
    read(j, "weight_decay", c.weight_decay);
    read(j, "beta1", c.beta1);
    read(j, "beta2", c.beta2);
    read(j, "eps", c.eps);
    read(j, "seed", c.seed);
    read(j, "prob_clamp", c.prob_clamp);
    read(j, "clip_norm", c.clip_norm);
    validate(c);
    return c;
}

json to_json(const Confusion& c) { return json{{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}; }

json to_json(const Metrics& m) {
    return json{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json to_json(const RunReport& r, bool include_runtime) {
    json j{{"model", r.model},
           {"dataset", r.dataset},
           {"data_fingerprint", r.data_fingerprint},
           {"spec", to_json(r.spec)},
           {"config", to_json(r.config)},
           {"epoch_losses", r.epoch_losses},
           {"epoch_train_accuracy", r.epoch_train_accuracy},
           {"confusion", to_json(r.confusion)},
           {"metrics", to_json(r.metrics)},
           {"macro_metrics", to_json(r.macro)},
           {"parameter_count", r.parameter_count},
           {"clipped_steps", r.clipped_steps},
           {"diverged", r.diverged}};
    if (!r.error.empty()) j["error"] = r.error;
    if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

RunReport run_report_from_json(const json& j) {
    try {
        RunReport r;
        r.model = j.at("model").get<std::string>();
        r.dataset = j.at("dataset").get<std::string>();
        r.data_fingerprint = j.value("data_fingerprint", "");
        r.spec = model_spec_from_json(j.at("spec"));
        r.config = train_config_from_json(j.at("config"));
        r.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
        r.epoch_train_accuracy = j.value("epoch_train_accuracy", std::vector<double>{});
        const auto& c = j.at("confusion");
        r.confusion = {c.at("tp").get<std::uint64_t>(), c.at("tn").get<std::uint64_t>(),
                       c.at("fp").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
        auto metrics_of = [](const json& m) {
            return Metrics{m.at("accuracy").get<double>(), m.at("precision").get<double>(),
                           m.at("recall").get<double>(), m.at("f1").get<double>()};
        };
        r.metrics = metrics_of(j.at("metrics"));
        r.macro = metrics_of(j.at("macro_metrics"));
        r.parameter_count = j.at("parameter_count").get<std::size_t>();
        r.clipped_steps = j.value("clipped_steps", std::size_t{0});
        r.diverged = j.value("diverged", false);
        r.error = j.value("error", "");
        r.runtime_seconds = j.value("runtime_seconds", 0.0);
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigParse, std::string("run report: ") + e.what());
    }
}

}  // namespace kanids
