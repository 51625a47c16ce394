// latseg/error.hpp
//
// Exception taxonomy.  The CLI maps these onto process exit codes.

// Copyright 2026  latseg authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LATSEG_ERROR_HPP_
#define LATSEG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace latseg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed inputs: bad dimensions, denormalized rows, invalid token ids.
struct ValidationError : Error {
  using Error::Error;
};

// Out-of-range frame / index arguments.
struct BoundsError : Error {
  using Error::Error;
};

// On-disk container problems: bad magic, unsupported version, truncation.
struct FormatError : Error {
  using Error::Error;
};

// Stream discipline violations: non-contiguous blocks, feeding after close.
struct StreamError : Error {
  using Error::Error;
};

// best_prefix_frame found no feasible frame in the requested window.
struct AlignmentNotFoundError : Error {
  using Error::Error;
};

// Bad run configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Missing or corrupt fixtures (CLI exit code 3).
struct FixtureError : Error {
  using Error::Error;
};

// Undefined metrics / mismatched report-fixture pairing (CLI exit code 4).
struct EvalError : Error {
  using Error::Error;
};

}  // namespace latseg

#endif  // LATSEG_ERROR_HPP_
