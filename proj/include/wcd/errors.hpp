/*
 * Copyright 2026 TransWCD-CPP Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WCD_ERRORS_HPP_
#define WCD_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wcd {

/// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input tensor has an unusable spatial size (e.g. not divisible by 32).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// A configuration value or combination of values is invalid.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Two tensors that must agree in shape do not.
class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

/// A dataset directory does not follow the expected layout.
class LayoutError : public Error {
 public:
  explicit LayoutError(const std::string& msg) : Error(msg) {}
};

/// No usable image-level label could be found or derived for a sample.
class LabelError : public Error {
 public:
  explicit LabelError(const std::string& msg) : Error(msg) {}
};

/// A scalar argument lies outside its documented range.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& msg) : Error(msg) {}
};

/// Metrics were requested from a confusion accumulator with zero pixels.
class EmptyCounts : public Error {
 public:
  explicit EmptyCounts(const std::string& msg) : Error(msg) {}
};

/// Pixel metrics were requested for a sample that has no ground-truth mask.
class MissingGT : public Error {
 public:
  explicit MissingGT(const std::string& msg) : Error(msg) {}
};

}  // namespace wcd

#endif  // WCD_ERRORS_HPP_
