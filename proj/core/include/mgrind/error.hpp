// Copyright 2026 The mgrind Authors. All Rights Reserved.
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

namespace mgrind {

// Every recoverable failure in the library derives from Error. The CLI maps
// Error to exit status 1 and UsageError to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched blob shapes or counts.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or definition content that parsed cleanly.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad magic, version, truncation or other binary/IDX container problems.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Shape whose element count cannot be addressed.
class AllocationError : public Error {
 public:
  using Error::Error;
};

// A value outside its legal domain, e.g. a class label >= class count.
class ValueError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct SourcePos {
  int line = 0;
  int column = 0;
};

// Text-format diagnostic; what() reads "<line>:<column>: <message>".
class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) +
              ": " + message),
        pos_(pos),
        message_(message) {}

  SourcePos pos() const { return pos_; }
  int line() const { return pos_.line; }
  int column() const { return pos_.column; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

}  // namespace mgrind
