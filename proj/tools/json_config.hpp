// Copyright 2026 The tadacap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace tadacap::cli {

// Subcommand chain selected on the command line, outermost first.
inline std::vector<const CLI::App*> active_chain(const CLI::App* root) {
  std::vector<const CLI::App*> chain{root};
  for (;;) {
    const auto subs = chain.back()->get_subcommands();
    if (subs.empty()) break;
    chain.push_back(subs.front());
  }
  return chain;
}

// Flat JSON config: {"option-name": value, ...}. Each key is routed to the
// innermost selected subcommand that defines --option-name; keys nobody
// defines are rejected here so the error names the key.
// Command-line flags still win because CLI11 only fills empty options.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    const auto chain = active_chain(root_);
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      bool known = false;
      for (std::size_t depth = chain.size(); depth-- > 0 && !known;) {
        if (chain[depth]->get_option_no_throw("--" + key) != nullptr) {
          for (std::size_t p = 1; p <= depth; ++p) item.parents.push_back(chain[p]->get_name());
          known = true;
        }
      }
      if (!known) throw CLI::ConversionError("unknown config key '" + key + "' for this command");
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(key, v));
      } else {
        item.inputs.push_back(scalar(key, value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return resolved(app, default_also).dump(2);
  }

  // Every option of the selected subcommand chain with its effective value.
  static nlohmann::json resolved(const CLI::App* root, bool default_also = true) {
    nlohmann::json out = nlohmann::json::object();
    std::string command;
    for (const CLI::App* app : active_chain(root)) {
      if (app != root) command += (command.empty() ? "" : " ") + app->get_name();
      for (const CLI::Option* op : app->get_options()) {
        const std::string name = op->get_lnames().empty() ? op->get_name(true) : op->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "dry-run") continue;
        std::vector<std::string> values = op->results();
        if (values.empty()) {
          if (!default_also) continue;
          if (op->get_expected_min() == 0) {
            out[name] = false;
            continue;
          }
          const std::string def = op->get_default_str();
          if (def.empty()) {
            out[name] = nullptr;
            continue;
          }
          values = {def};
        }
        if (op->get_expected_min() == 0) {
          out[name] = true;
        } else if (op->get_expected_max() > 1) {
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& v : values) arr.push_back(typed(v));
          out[name] = std::move(arr);
        } else {
          out[name] = typed(values.back());
        }
      }
    }
    out["command"] = command;
    return out;
  }

 private:
  static std::string scalar(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' must be a string, number, boolean or array of those");
  }

  static nlohmann::json typed(const std::string& s) {
    const auto parsed = nlohmann::json::parse(s, nullptr, false);
    if (!parsed.is_discarded() && (parsed.is_number() || parsed.is_boolean())) return parsed;
    return s;
  }

  const CLI::App* root_;
};

}  // namespace tadacap::cli
