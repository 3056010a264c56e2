#pragma once

// Experiment configuration for the command-line tool: a JSON document with
// defaults for every key, dotted-path overrides (`--mixing.kind Sub`), and
// run manifests that record the resolved config plus input content hashes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wic/corpus.hpp"
#include "wic/error.hpp"
#include "wic/model.hpp"
#include "wic/trainer.hpp"

namespace wic {

using Json = nlohmann::ordered_json;

inline constexpr const char* kManifestFormat = "wic-manifest-1";

inline Json default_experiment_json() {
  Json train;
  to_json(train, TrainConfig{});
  Json j;
  j["data"] = {{"main_train", ""},       {"main_dev", ""},      {"main_test", ""},
               {"aux_train", ""},        {"main_format", "canonical"}, {"aux_format", "canonical"},
               {"field_mappings", ""},   {"load_policy", "fail_fast"}};
  j["encoder"] = {{"mode", "toy"}, {"precomputed_path", ""}};
  j["mixing"] = train["mixing"];
  j["loss"] = train["loss"];
  train.erase("mixing");
  train.erase("loss");
  j["train"] = train;
  j["out"] = "runs/default";
  return j;
}

struct ExperimentConfig {
  std::string main_train, main_dev, main_test, aux_train;
  DataFormat main_format = DataFormat::canonical;
  DataFormat aux_format = DataFormat::canonical;
  std::string field_mappings;
  LoadPolicy load_policy = LoadPolicy::fail_fast;
  EncoderMode encoder_mode = EncoderMode::toy;
  std::string precomputed_path;
  TrainConfig train;
  std::string out;
};

namespace detail {

// Every key of `patch` must already exist in `base` (objects are recursed).
inline void merge_known(Json& base, const Json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (base[key].is_object()) {
      merge_known(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base_dir) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_relative()) path = base_dir / path;
  return path.lexically_normal().string();
}

}  // namespace detail

// Applies one `--a.b value` override, typed after the default value at that key.
inline void apply_override(Json& config, const std::string& dotted, const std::string& value) {
  static const Json defaults = default_experiment_json();
  const Json* type_node = &defaults;
  Json* node = &config;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!type_node->is_object() || !type_node->contains(part)) {
      throw ConfigError("unknown config key '" + dotted + "'");
    }
    type_node = &(*type_node)[part];
    node = &(*node)[part];
  }
  if (type_node->is_object()) throw ConfigError("config key '" + dotted + "' is a section, not a value");
  try {
    if (type_node->is_boolean()) {
      if (value != "true" && value != "false") throw ConfigError("expected true or false");
      *node = value == "true";
    } else if (type_node->is_number_unsigned() || type_node->is_number_integer()) {
      std::size_t pos = 0;
      const long long v = std::stoll(value, &pos);
      if (pos != value.size()) throw ConfigError("expected an integer");
      if (type_node->is_number_unsigned() && v < 0) throw ConfigError("expected a non-negative integer");
      if (type_node->is_number_unsigned()) *node = static_cast<std::uint64_t>(v);
      else *node = v;
    } else if (type_node->is_number_float()) {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw ConfigError("expected a number");
      *node = v;
    } else {
      *node = value;
    }
  } catch (const ConfigError& e) {
    throw ConfigError("override --" + dotted + " " + value + ": " + e.what());
  } catch (const std::exception&) {
    throw ConfigError("override --" + dotted + " " + value + ": not a valid value");
  }
}

// Reads a config file (or a run manifest, whose resolved config is reused).
// Relative data paths are resolved against the file's directory.
inline Json load_experiment_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path);
  Json file;
  try {
    in >> file;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  if (file.is_object() && file.value("format", std::string()) == kManifestFormat) file = file.at("config");

  Json config = default_experiment_json();
  detail::merge_known(config, file, "");
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const char* key : {"main_train", "main_dev", "main_test", "aux_train", "field_mappings"}) {
    auto& v = config["data"][key];
    v = detail::resolve_path(v.get<std::string>(), base);
  }
  auto& pre = config["encoder"]["precomputed_path"];
  pre = detail::resolve_path(pre.get<std::string>(), base);
  return config;
}

inline TrainConfig train_config_from_experiment(const Json& j) {
  Json train = j.at("train");
  train["mixing"] = j.at("mixing");
  train["loss"] = j.at("loss");
  return train_config_from_json(train);
}

inline ExperimentConfig parse_experiment(const Json& j) {
  ExperimentConfig c;
  try {
    const auto& d = j.at("data");
    c.main_train = d.at("main_train").get<std::string>();
    c.main_dev = d.at("main_dev").get<std::string>();
    c.main_test = d.at("main_test").get<std::string>();
    c.aux_train = d.at("aux_train").get<std::string>();
    c.main_format = format_from_string(d.at("main_format").get<std::string>());
    c.aux_format = format_from_string(d.at("aux_format").get<std::string>());
    c.field_mappings = d.at("field_mappings").get<std::string>();
    const auto policy = d.at("load_policy").get<std::string>();
    if (policy == "fail_fast") c.load_policy = LoadPolicy::fail_fast;
    else if (policy == "skip") c.load_policy = LoadPolicy::skip_with_warning;
    else throw ConfigError("data.load_policy must be fail_fast or skip");
    c.encoder_mode = encoder_mode_from_string(j.at("encoder").at("mode").get<std::string>());
    c.precomputed_path = j.at("encoder").at("precomputed_path").get<std::string>();
    c.out = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.train = train_config_from_experiment(j);
  c.train.validate();
  if (c.main_train.empty() || c.main_dev.empty()) throw ConfigError("data.main_train and data.main_dev are required");
  if (c.train.mixing.kind != MixKind::No && c.aux_train.empty()) {
    throw ConfigError("mixing kind " + std::string(to_string(c.train.mixing.kind)) + " needs data.aux_train");
  }
  if (c.encoder_mode == EncoderMode::precomputed && c.precomputed_path.empty()) {
    throw ConfigError("encoder.mode precomputed needs encoder.precomputed_path");
  }
  if (c.out.empty()) throw ConfigError("out directory is empty");
  return c;
}

// FNV-1a 64-bit content hash, hex encoded.
inline std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path + " for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

inline Json make_manifest(const std::string& command, const Json& config,
                          const std::vector<std::pair<std::string, std::string>>& inputs,
                          const std::vector<std::string>& overrides = {}) {
  Json m;
  m["format"] = kManifestFormat;
  m["command"] = command;
  m["config"] = config;
  m["overrides"] = overrides;
  Json files = Json::object();
  for (const auto& [role, path] : inputs) {
    if (path.empty()) continue;
    files[role] = {{"path", path}, {"fnv1a64", file_hash(path)}};
  }
  m["inputs"] = files;
  return m;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace wic
