//
// Copyright 2026 The mtpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <stdexcept>
#include <string>

namespace mtpipe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input data does not match the expected on-disk format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid option, parameter or configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid in-memory argument (dimension mismatch, bad index, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A score was requested for input it is not defined on.
class ScoreError : public Error {
 public:
  using Error::Error;
};

// Subword token stream violates the end-of-word marker convention.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Prompt template is missing a required placeholder.
class TemplateError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtpipe
