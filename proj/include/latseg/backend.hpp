// latseg/backend.hpp
//
// Abstract translation-model backend.  The engine never sees model internals:
// it feeds speech blocks, receives lattice rows, and queries next-token
// distributions for the active beam.

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

#ifndef LATSEG_BACKEND_HPP_
#define LATSEG_BACKEND_HPP_

#include <cstdint>
#include <vector>

#include "latseg/lattice.hpp"

namespace latseg {

struct BackendCounters {
  std::uint64_t encode_calls = 0;
  // One decoder inference step over the whole active beam (batched), i.e.
  // one beam-expansion round.
  std::uint64_t decode_steps = 0;
};

struct EncodeOut {
  std::size_t state_frames = 0;  // encoder frames added; equals rows.frames()
  CtcLattice rows;               // lattice rows for exactly those frames
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  // Lattice column count V+1 (tokens + blank at the final index).
  virtual int vocab_width() const = 0;
  // Index of end-of-sequence in decoder distributions; equals V, so decoder
  // rows have V+1 entries: token ids 0..V-1 plus EOS.  Blank never appears.
  int eos_id() const { return vocab_width() - 1; }

  virtual EncodeOut encode_block(const SpeechBlock& block) = 0;

  // Scores every prefix of the active beam in one batched call; each result
  // row is a normalized log distribution over V tokens + EOS.  Prefixes are
  // segment-local token ids.
  virtual std::vector<std::vector<double>> decoder_step(
      const std::vector<std::vector<int>>& prefixes) = 0;

  // Clears decoder context at a segment boundary.  `finalized_in_segment` is
  // the number of tokens emitted into the segment just closed, which lets
  // stateful backends re-anchor on the first unfinalized token.
  virtual void reset_segment(std::size_t finalized_in_segment) = 0;

  const BackendCounters& counters() const { return counters_; }

 protected:
  BackendCounters counters_;
};

}  // namespace latseg

#endif  // LATSEG_BACKEND_HPP_
