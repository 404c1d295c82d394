// Copyright 2026 The Cobrand Authors.
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cobrand {

// Base class for every error the library raises. `kind()` names the error
// class and is what the CLI prints on stderr.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Shapes or lengths that do not fit together.
class MalformedInput : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "malformed-input"; }
};

// A success probability was requested that the graph does not define.
class IncompleteGraph : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "incomplete-graph"; }
};

// The caller broke a documented precondition (e.g. an off-grid allocation).
class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

// Dataset files that cannot be parsed.
class LoadError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "load-error"; }
};

class ZeroTotalError : public LoadError {
 public:
  using LoadError::LoadError;
  const char* kind() const noexcept override { return "zero-total"; }
};

class RaggedRowsError : public LoadError {
 public:
  using LoadError::LoadError;
  const char* kind() const noexcept override { return "ragged-rows"; }
};

class NonNumericCellError : public LoadError {
 public:
  using LoadError::LoadError;
  const char* kind() const noexcept override { return "non-numeric-cell"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class InfeasibleInstance : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "infeasible"; }
};

class OracleLimitExceeded : public Error {
 public:
  OracleLimitExceeded(double candidates, double limit)
      : Error("brute-force candidate count " + std::to_string(candidates) +
              " exceeds limit " + std::to_string(limit)),
        candidates_(candidates) {}
  const char* kind() const noexcept override { return "oracle-limit"; }
  double candidates() const noexcept { return candidates_; }

 private:
  double candidates_;
};

}  // namespace cobrand
