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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tadacap {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an argument outside the operation's contract
// (k > n, negative epsilon, series too short, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Configuration problem detected before any work was attempted:
// unknown config keys, missing credentials, unparsable endpoints.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Data is valid but the workflow has not reached the required state,
// e.g. diverse mode before exemplar annotations were imported.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: bad JSONL lines, unexpected service responses,
// duplicate ids, dimension mismatches.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Network failure that survived the retry policy.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate principal minor in a DPP computation.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::vector<std::size_t> subset);

  const std::vector<std::size_t>& subset() const noexcept { return subset_; }

 private:
  std::vector<std::size_t> subset_;
};

}  // namespace tadacap
