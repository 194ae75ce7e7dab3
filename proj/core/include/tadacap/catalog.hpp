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

#include <string>
#include <string_view>
#include <vector>

// Regime tables and phrase banks shipped with the library
// (core/data/stock_regimes.json and core/data/physics_phrases.json).
namespace tadacap::synth {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  bool operator==(const Range&) const = default;
};

struct StockRanges {
  Range mean;
  Range sigma;
  Range shock_prob;
  Range trend;
  Range kappa;
  Range shock_sigma;
};

struct RegimeSpec {
  std::string name;
  StockRanges ranges;
  std::vector<std::string> agnostic;
  std::vector<std::string> domain;
  // Regimes whose defining feature is the shocks; sigma_shock >= sigma holds there.
  bool shock_regime = false;
};

struct PhysicsClass {
  std::string name;
  std::string kind;  // "linear" | "exponential"
  int sign = 0;      // sign of the rate parameter p1 / q1
  std::vector<std::string> velocity;
  std::vector<std::string> agnostic;
};

struct PhysicsCatalog {
  std::vector<PhysicsClass> classes;
  std::vector<std::string> first_connectives;
  std::vector<std::string> second_connectives;

  const PhysicsClass& find(std::string_view name) const;
};

// Verbatim bytes of the bundled data files (checksummed by the tests).
std::string_view stock_catalog_source();
std::string_view physics_catalog_source();

std::vector<RegimeSpec> parse_stock_catalog(std::string_view json);
PhysicsCatalog parse_physics_catalog(std::string_view json);

// Parsed once, on first use.
const std::vector<RegimeSpec>& stock_catalog();
const PhysicsCatalog& physics_catalog();

const RegimeSpec& find_regime(std::string_view name);

}  // namespace tadacap::synth
