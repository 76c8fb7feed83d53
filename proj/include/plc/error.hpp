// Copyright 2026 The PLC Authors. All Rights Reserved.
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

namespace plc {

// Base class of every error thrown by the library. Each subclass maps to a
// distinct exit code in the command-line tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or argument sizes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input: bad magic, truncated header, bad segment table, bad PPM.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

// An entropy-coded stream that cannot be decoded with the given model.
class CorruptStreamError : public Error {
 public:
  using Error::Error;
};

// Quality outside [0,100], unsorted targets, or a q that is not a boundary.
class QualityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace plc
