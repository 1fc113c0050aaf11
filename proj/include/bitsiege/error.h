// Copyright 2026 The bitsiege Authors
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

#ifndef BITSIEGE_ERROR_H_
#define BITSIEGE_ERROR_H_

#include <stdexcept>
#include <string>

namespace bitsiege {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input whose shape does not match what the model or layer expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `location()` names the header line or byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& what)
      : Error(location + ": " + what), location_(location) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bitsiege

#endif  // BITSIEGE_ERROR_H_
