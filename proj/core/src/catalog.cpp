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
#include "tadacap/catalog.hpp"

#include <nlohmann/json.hpp>

#include "tadacap/errors.hpp"

namespace tadacap::synth {
namespace detail {
std::string_view stock_regimes_json();
std::string_view physics_phrases_json();
}  // namespace detail

namespace {

Range parse_range(const nlohmann::json& j, const std::string& field, const std::string& regime) {
  if (!j.is_array() || j.size() != 2) {
    throw FormatError("regime '" + regime + "': field '" + field + "' must be a [lo, hi] pair");
  }
  Range r{j[0].get<double>(), j[1].get<double>()};
  if (!(r.lo <= r.hi)) throw FormatError("regime '" + regime + "': empty range for '" + field + "'");
  return r;
}

std::vector<std::string> parse_bank(const nlohmann::json& j, const std::string& what, const std::string& owner) {
  auto bank = j.get<std::vector<std::string>>();
  if (bank.empty()) throw FormatError("'" + owner + "': empty " + what + " phrase bank");
  for (const auto& phrase : bank) {
    if (phrase.empty()) throw FormatError("'" + owner + "': empty phrase in " + what + " bank");
  }
  return bank;
}

}  // namespace

const PhysicsClass& PhysicsCatalog::find(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("physics sign-class '" + std::string(name) + "' is not in the catalog");
}

std::string_view stock_catalog_source() { return detail::stock_regimes_json(); }
std::string_view physics_catalog_source() { return detail::physics_phrases_json(); }

std::vector<RegimeSpec> parse_stock_catalog(std::string_view json) {
  try {
    const auto root = nlohmann::json::parse(json);
    std::vector<RegimeSpec> out;
    for (const auto& r : root.at("regimes")) {
      RegimeSpec spec;
      spec.name = r.at("name").get<std::string>();
      const auto& p = r.at("params");
      spec.ranges.mean = parse_range(p.at("mean"), "mean", spec.name);
      spec.ranges.sigma = parse_range(p.at("sigma"), "sigma", spec.name);
      spec.ranges.shock_prob = parse_range(p.at("p"), "p", spec.name);
      spec.ranges.trend = parse_range(p.at("T"), "T", spec.name);
      spec.ranges.kappa = parse_range(p.at("kappa"), "kappa", spec.name);
      spec.ranges.shock_sigma = parse_range(p.at("shock_sigma"), "shock_sigma", spec.name);
      spec.agnostic = parse_bank(r.at("agnostic"), "agnostic", spec.name);
      spec.domain = parse_bank(r.at("domain"), "domain", spec.name);
      spec.shock_regime = r.value("shock_regime", false);
      out.push_back(std::move(spec));
    }
    if (out.empty()) throw FormatError("stock catalog has no regimes");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("stock catalog: ") + e.what());
  }
}

PhysicsCatalog parse_physics_catalog(std::string_view json) {
  try {
    const auto root = nlohmann::json::parse(json);
    PhysicsCatalog cat;
    for (const auto& c : root.at("classes")) {
      PhysicsClass pc;
      pc.name = c.at("name").get<std::string>();
      pc.kind = c.at("kind").get<std::string>();
      if (pc.kind != "linear" && pc.kind != "exponential") {
        throw FormatError("physics class '" + pc.name + "' has unknown kind '" + pc.kind + "'");
      }
      pc.sign = c.at("sign").get<int>();
      pc.velocity = parse_bank(c.at("velocity"), "velocity", pc.name);
      pc.agnostic = parse_bank(c.at("agnostic"), "agnostic", pc.name);
      cat.classes.push_back(std::move(pc));
    }
    cat.first_connectives = parse_bank(root.at("connectives").at("first"), "connective", "first");
    cat.second_connectives = parse_bank(root.at("connectives").at("second"), "connective", "second");
    return cat;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("physics catalog: ") + e.what());
  }
}

const std::vector<RegimeSpec>& stock_catalog() {
  static const std::vector<RegimeSpec> kCatalog = parse_stock_catalog(stock_catalog_source());
  return kCatalog;
}

const PhysicsCatalog& physics_catalog() {
  static const PhysicsCatalog kCatalog = parse_physics_catalog(physics_catalog_source());
  return kCatalog;
}

const RegimeSpec& find_regime(std::string_view name) {
  for (const auto& r : stock_catalog()) {
    if (r.name == name) return r;
  }
  throw InvalidArgument("unknown stock regime '" + std::string(name) + "'");
}

}  // namespace tadacap::synth
