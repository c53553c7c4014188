// Copyright 2026 The pfuse Authors.
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

#ifndef PFUSE_ERROR_HPP_
#define PFUSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pfuse {

// Bad input: dimension mismatch, malformed file, out-of-range parameter.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A postcondition the library promises was found broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pfuse

#endif  // PFUSE_ERROR_HPP_
