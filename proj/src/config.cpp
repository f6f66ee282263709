#include "cwb/config.hpp"

#include <initializer_list>
#include <string>

#include "cwb/io.hpp"

namespace cwb {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  require(j.is_object(), where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) {
      std::string expectation = "expected one of {";
      bool first = true;
      for (const char* a : allowed) {
        if (!first) expectation += ", ";
        expectation += a;
        first = false;
      }
      expectation += "}";
      throw ConfigError(where + ": unknown key '" + key + "'; " + expectation);
    }
  }
}

template <typename T>
const char* type_name();
template <>
const char* type_name<int>() { return "integer"; }
template <>
const char* type_name<double>() { return "number"; }
template <>
const char* type_name<std::uint64_t>() { return "non-negative integer"; }
template <>
const char* type_name<std::string>() { return "string"; }

template <typename T>
void read_field(const json& j, const std::string& where, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;  // keep the struct default
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + std::string(key) + "' expects a " +
                      type_name<T>());
  }
}

}  // namespace

json to_json(const ModelConfig& m) {
  return json{{"embed_dim", m.embed_dim},
              {"hidden_dim", m.hidden_dim},
              {"enc_layers", m.enc_layers},
              {"dec_layers", m.dec_layers},
              {"heads", m.heads},
              {"value_mlp_hidden", m.value_mlp_hidden},
              {"max_nodes", m.max_nodes},
              {"classes", m.three_class ? "three_graph" : "two_graph"}};
}

ModelConfig model_config_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, where,
                      {"embed_dim", "hidden_dim", "enc_layers", "dec_layers", "heads",
                       "value_mlp_hidden", "max_nodes", "classes"});
  ModelConfig m;
  read_field(j, where, "embed_dim", m.embed_dim);
  read_field(j, where, "hidden_dim", m.hidden_dim);
  read_field(j, where, "enc_layers", m.enc_layers);
  read_field(j, where, "dec_layers", m.dec_layers);
  read_field(j, where, "heads", m.heads);
  read_field(j, where, "value_mlp_hidden", m.value_mlp_hidden);
  read_field(j, where, "max_nodes", m.max_nodes);
  std::string classes = m.three_class ? "three_graph" : "two_graph";
  read_field(j, where, "classes", classes);
  if (classes != "two_graph" && classes != "three_graph")
    throw ConfigError(where + ": key 'classes' expects two_graph or three_graph");
  m.three_class = classes == "three_graph";
  return m;
}

json to_json(const TrainConfig& c) {
  json mixture = json::array();
  for (const auto& [cls, ratio] : c.mixture) mixture.push_back({cls, ratio});
  return json{{"name", c.name},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"validation_fraction", c.validation_fraction},
              {"seed", c.seed},
              {"grad_clip_norm", c.grad_clip_norm},
              {"model", to_json(c.model)},
              {"mixture", mixture}};
}

TrainConfig train_config_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, where,
                      {"name", "learning_rate", "batch_size", "max_epochs", "patience",
                       "validation_fraction", "seed", "grad_clip_norm", "model",
                       "mixture"});
  TrainConfig c;
  read_field(j, where, "name", c.name);
  read_field(j, where, "learning_rate", c.learning_rate);
  read_field(j, where, "batch_size", c.batch_size);
  read_field(j, where, "max_epochs", c.max_epochs);
  read_field(j, where, "patience", c.patience);
  read_field(j, where, "validation_fraction", c.validation_fraction);
  read_field(j, where, "seed", c.seed);
  read_field(j, where, "grad_clip_norm", c.grad_clip_norm);
  if (auto it = j.find("model"); it != j.end())
    c.model = model_config_from_json(*it, where + ".model");
  if (auto it = j.find("mixture"); it != j.end()) {
    if (!it->is_array())
      throw ConfigError(where + ": key 'mixture' expects an array of [class, ratio]");
    for (const auto& entry : *it) {
      if (!entry.is_array() || entry.size() != 2 || !entry.at(0).is_string() ||
          !entry.at(1).is_number())
        throw ConfigError(where + ": key 'mixture' expects [class, ratio] pairs");
      c.mixture.emplace_back(entry.at(0).get<std::string>(),
                             entry.at(1).get<double>());
    }
  }
  c.validate();
  return c;
}

json to_json(const CorpusConfig& c) {
  json classes = json::array();
  for (const CorpusClassConfig& cls : c.classes) {
    json jc = {{"mechanism", cls.mechanism}, {"noise", cls.noise}, {"ratio", cls.ratio}};
    if (cls.noise_params)
      jc["noise_params"] = {(*cls.noise_params)[0], (*cls.noise_params)[1]};
    classes.push_back(jc);
  }
  return json{{"name", c.name},
              {"num_datasets", c.num_datasets},
              {"samples_per_dataset", c.samples_per_dataset},
              {"seed", c.seed},
              {"classes", classes}};
}

CorpusConfig corpus_config_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(
      j, where, {"name", "num_datasets", "samples_per_dataset", "seed", "classes"});
  CorpusConfig c;
  c.name = "corpus";
  c.num_datasets = 200;
  c.samples_per_dataset = 200;
  read_field(j, where, "name", c.name);
  read_field(j, where, "num_datasets", c.num_datasets);
  read_field(j, where, "samples_per_dataset", c.samples_per_dataset);
  read_field(j, where, "seed", c.seed);
  if (auto it = j.find("classes"); it != j.end()) {
    if (!it->is_array())
      throw ConfigError(where + ": key 'classes' expects an array");
    int k = 0;
    for (const auto& entry : *it) {
      const std::string sub = where + ".classes[" + std::to_string(k++) + "]";
      reject_unknown_keys(entry, sub, {"mechanism", "noise", "ratio", "noise_params"});
      CorpusClassConfig cls;
      read_field(entry, sub, "mechanism", cls.mechanism);
      read_field(entry, sub, "noise", cls.noise);
      read_field(entry, sub, "ratio", cls.ratio);
      if (auto np = entry.find("noise_params"); np != entry.end()) {
        if (!np->is_array() || np->size() != 2 || !np->at(0).is_number() ||
            !np->at(1).is_number())
          throw ConfigError(sub + ": key 'noise_params' expects two numbers");
        cls.noise_params = {{np->at(0).get<double>(), np->at(1).get<double>()}};
      }
      c.classes.push_back(cls);
    }
  } else {
    c.classes.push_back(CorpusClassConfig{});
  }
  c.validate();
  return c;
}

namespace {

std::string line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// Best-effort line anchor for schema errors: the first quoted token in the
// message is looked up as a key in the raw text.
std::string anchor_schema_error(const std::string& path, const std::string& text,
                                const std::string& message) {
  std::string anchored = path + ": " + message;
  const std::size_t open = message.find('\'');
  if (open == std::string::npos) return anchored;
  const std::size_t close = message.find('\'', open + 1);
  if (close == std::string::npos) return anchored;
  const std::string key =
      "\"" + message.substr(open + 1, close - open - 1) + "\"";
  const std::size_t at = text.find(key);
  if (at == std::string::npos) return anchored;
  std::size_t line = 1;
  for (std::size_t i = 0; i < at; ++i)
    if (text[i] == '\n') ++line;
  return path + ":" + std::to_string(line) + ": " + message;
}

json parse_json_file(const std::string& path, std::string& text_out) {
  text_out = read_text_file(path);
  try {
    return json::parse(text_out);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + line_of_byte(text_out, e.byte) +
                      ": JSON parse error: " + e.what());
  }
}

template <typename Fn>
auto parse_with_anchors(const std::string& path, Fn fn) {
  std::string text;
  json j = parse_json_file(path, text);
  try {
    return fn(j);
  } catch (const ConfigError& e) {
    throw ConfigError(anchor_schema_error(path, text, e.what()));
  }
}

}  // namespace

CorpusConfig parse_corpus_config_file(const std::string& path) {
  return parse_with_anchors(
      path, [](const json& j) { return corpus_config_from_json(j, "corpus"); });
}

TrainConfig parse_train_config_file(const std::string& path) {
  return parse_with_anchors(
      path, [](const json& j) { return train_config_from_json(j, "train"); });
}

}  // namespace cwb
