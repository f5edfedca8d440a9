#pragma once

#include "json.hpp"
#include "kanids/metrics.hpp"
#include "kanids/models.hpp"
#include "kanids/train.hpp"

namespace kanids {

// Readers are strict: unknown keys and wrong types throw config-parse-error.
// Missing keys keep their defaults.

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Confusion& conf);
nlohmann::json to_json(const Metrics& m);

/// Report document. Wall-clock runtime is left out unless asked for so the
/// numeric document of a run is reproducible byte for byte.
nlohmann::json to_json(const RunReport& report, bool include_runtime = false);
RunReport run_report_from_json(const nlohmann::json& j);

}  // namespace kanids
