// Copyright 2026 The C2C Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>

namespace c2c {

// Base for every error raised by the library. The CLI maps the category to
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: configuration values, flags, contract violations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Problems with data on disk or its contents.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedFormatError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyAudioError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ValueError : public DataError {
 public:
  using DataError::DataError;
};

class TooShortError : public DataError {
 public:
  using DataError::DataError;
};

class EmptySegmentError : public DataError {
 public:
  using DataError::DataError;
};

class SplitInfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedMetricError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite loss or parameters during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace c2c
