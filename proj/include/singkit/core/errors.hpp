// Copyright 2026 The singkit Authors
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

namespace singkit {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Mismatched tensor/stream shapes or lengths.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Invalid configuration values or unknown config keys.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Bad argument values at runtime (out-of-domain inputs, bad plans, ...).
class ValueError : public Error {
public:
  using Error::Error;
};

// Unreadable/unwritable files.
class IoError : public Error {
public:
  using Error::Error;
};

// Recognizably wrong file contents (bad magic, wrong version).
class FormatError : public Error {
public:
  using Error::Error;
};

// Structurally valid header but payload does not match it.
class CorruptionError : public Error {
public:
  using Error::Error;
};

// Non-finite losses or gradients during training/sampling.
class DivergedError : public Error {
public:
  using Error::Error;
};

} // namespace singkit
