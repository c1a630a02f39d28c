// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <stdexcept>
#include <string>

namespace mfn {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the operation's domain (empty input, bad ratio, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Object used in a state that forbids the call (e.g. backward twice on a tape).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where only finite values are allowed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Views present/missing relative to a schema or configuration.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Views of one sequence disagree on length T.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the line number when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfn
