// Copyright 2026 The pnas Authors. All Rights Reserved.
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

namespace pnas {

// Base for every domain error raised by the library. The CLI maps these to
// exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Architecture, space or assignment invariant violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Exact integer arithmetic would overflow.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Malformed document (architecture/space/config file, log record).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Trial log does not match the configuration or has been altered.
class LogError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnas
