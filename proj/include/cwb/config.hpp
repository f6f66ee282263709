#pragma once

#include <string>

#include <json.hpp>

#include "cwb/scm.hpp"
#include "cwb/train.hpp"

namespace cwb {

// JSON converters for the run configurations. Parsing is strict: unknown keys
// are rejected (with the key path), wrong types name the key and the expected
// type, and absent keys fall back to the struct defaults. `where` prefixes
// error messages ("corpus", "train.model", ...).
nlohmann::json to_json(const ModelConfig& config);
nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const CorpusConfig& config);

ModelConfig model_config_from_json(const nlohmann::json& j, const std::string& where);
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& where);
CorpusConfig corpus_config_from_json(const nlohmann::json& j, const std::string& where);

// File front ends: parse errors carry line:column, schema errors are
// annotated with the line of the offending key where it can be located.
CorpusConfig parse_corpus_config_file(const std::string& path);
TrainConfig parse_train_config_file(const std::string& path);

}  // namespace cwb
