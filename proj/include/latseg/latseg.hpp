// latseg/latseg.hpp
//
// Convenience umbrella: pulls in the whole library.

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

#ifndef LATSEG_LATSEG_HPP_
#define LATSEG_LATSEG_HPP_

#include "latseg/backend.hpp"
#include "latseg/beam.hpp"
#include "latseg/corpus.hpp"
#include "latseg/ctc.hpp"
#include "latseg/error.hpp"
#include "latseg/evaluate.hpp"
#include "latseg/lattice.hpp"
#include "latseg/lattice_io.hpp"
#include "latseg/logmath.hpp"
#include "latseg/pause_mask.hpp"
#include "latseg/policy.hpp"
#include "latseg/rng.hpp"
#include "latseg/script.hpp"
#include "latseg/simulate.hpp"
#include "latseg/vocabulary.hpp"

#endif  // LATSEG_LATSEG_HPP_
