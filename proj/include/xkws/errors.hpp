// Copyright 2026 The xkws Authors
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

namespace xkws {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text or binary (manifest lines, file headers).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Shape or dimension mismatch between collaborating objects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace xkws

namespace xkws {

// Input sequence too short for the network's receptive field.
class LengthError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

}  // namespace xkws
