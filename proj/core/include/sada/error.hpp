// Copyright 2026 The SAda Authors.
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

namespace sada {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents do not match the expected encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor, image, or map dimensions are incompatible.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The sampler could not place an in-bounds patch triplet.
class SamplingExhaustedError : public Error {
 public:
  using Error::Error;
};

/// A metric has an empty denominator.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace sada
