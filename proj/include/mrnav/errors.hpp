/*
 * Copyright 2026 The mrnav Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRNAV_ERRORS_HPP
#define MRNAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mrnav {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidCellError : std::runtime_error {
  explicit InvalidCellError(const std::string& what) : std::runtime_error(what) {}
};

struct NoFeaturesError : std::runtime_error {
  explicit NoFeaturesError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySetError : std::runtime_error {
  explicit EmptySetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrnav

#endif  // MRNAV_ERRORS_HPP
