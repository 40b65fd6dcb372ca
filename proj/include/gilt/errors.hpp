// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gilt {

// Every failure surfaced by the library derives from Error so that the CLI can
// map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid data: index out of range, row-count mismatch, ...
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Bad configuration values or incompatible options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Not enough classes / items / non-edges to build the requested episode.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Evaluation protocol violated (leakage, split misuse, impossible K).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss, failed gradient pre-flight, ...
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gilt
