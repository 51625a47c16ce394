// latseg/logmath.hpp
//
// Log-domain arithmetic helpers shared by the CTC and decoding code.

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

#ifndef LATSEG_LOGMATH_HPP_
#define LATSEG_LOGMATH_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace latseg {

// Log-domain zero (probability 0).  True -inf so that exp() gives exact 0;
// log_add guards the -inf/-inf case below.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return std::isinf(x) && x < 0.0; }

// log(exp(a) + exp(b)) with max-shift; exact identity when one side is -inf,
// which keeps plateaus bit-stable when the increment has zero mass.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (is_log_zero(b)) return a;
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) m = std::max(m, x);
  if (is_log_zero(m)) return kLogZero;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace latseg

#endif  // LATSEG_LOGMATH_HPP_
