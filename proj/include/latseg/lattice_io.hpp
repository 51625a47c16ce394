// latseg/lattice_io.hpp
//
// On-disk lattice container.
//
// Binary layout (little-endian):
//   bytes 0..3   magic "CTCL"
//   u32          version (1)
//   u64          frames T
//   u64          width V+1
//   f64          frame_duration_ms
//   T*(V+1) f32  log posteriors, row-major
// The vocabulary lives alongside in <path>.vocab as UTF-8 lines, one surface
// per line, blank last.  A JSON mirror (*.json) with the same content is
// accepted for small fixtures; JSON encodes -inf as values <= -1e30.

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

#ifndef LATSEG_LATTICE_IO_HPP_
#define LATSEG_LATTICE_IO_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/vocabulary.hpp"

namespace latseg {

inline constexpr char kLatticeMagic[4] = {'C', 'T', 'C', 'L'};
inline constexpr std::uint32_t kLatticeVersion = 1;
// JSON sentinel floor: values at or below this decode as -inf.
inline constexpr double kJsonLogFloor = -1e30;

namespace detail {

inline std::vector<char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

template <typename T>
T read_pod(const std::vector<char>& buf, std::size_t& off, const std::string& path) {
  if (off + sizeof(T) > buf.size())
    throw FormatError("'" + path + "': truncated at byte " + std::to_string(off) +
                      " (need " + std::to_string(sizeof(T)) + " more, have " +
                      std::to_string(buf.size() - off) + ")");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace detail

inline std::string vocab_sidecar_path(const std::string& lattice_path) {
  return lattice_path + ".vocab";
}
inline std::string mask_sidecar_path(const std::string& lattice_path) {
  return lattice_path + ".mask";
}

inline void write_vocab_file(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  for (int id = 0; id < vocab.width(); ++id) out << vocab.surface(id) << '\n';
}

inline Vocabulary read_vocab_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2)
    throw FormatError("'" + path + "': vocabulary needs at least one token plus blank");
  std::string blank = lines.back();
  lines.pop_back();
  return Vocabulary::create(std::move(lines), std::move(blank));
}

inline void save_lattice_file(const std::string& path, const CtcLattice& lat,
                              const Vocabulary& vocab) {
  if (vocab.width() != lat.width())
    throw ValidationError("save_lattice_file: vocabulary width mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  out.write(kLatticeMagic, 4);
  detail::write_pod<std::uint32_t>(out, kLatticeVersion);
  detail::write_pod<std::uint64_t>(out, lat.frames());
  detail::write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(lat.width()));
  detail::write_pod<double>(out, lat.frame_duration_ms());
  for (std::size_t t = 0; t < lat.frames(); ++t)
    for (double v : lat.row(t)) detail::write_pod<float>(out, static_cast<float>(v));
  if (!out) throw FixtureError("write failed for '" + path + "'");
  write_vocab_file(vocab_sidecar_path(path), vocab);
}

inline std::pair<CtcLattice, Vocabulary> load_lattice_binary(const std::string& path) {
  auto buf = detail::read_file_bytes(path);
  std::size_t off = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kLatticeMagic, 4) != 0)
    throw FormatError("'" + path + "': bad magic (expected CTCL)");
  off = 4;
  auto version = detail::read_pod<std::uint32_t>(buf, off, path);
  if (version != kLatticeVersion)
    throw FormatError("'" + path + "': unsupported container version " +
                      std::to_string(version));
  auto frames = detail::read_pod<std::uint64_t>(buf, off, path);
  auto width = detail::read_pod<std::uint64_t>(buf, off, path);
  auto frame_ms = detail::read_pod<double>(buf, off, path);
  if (width == 0 || width > 1u << 20)
    throw FormatError("'" + path + "': implausible width " + std::to_string(width));
  std::vector<double> data;
  data.reserve(frames * width);
  for (std::uint64_t i = 0; i < frames * width; ++i)
    data.push_back(static_cast<double>(detail::read_pod<float>(buf, off, path)));
  if (off != buf.size())
    throw FormatError("'" + path + "': " + std::to_string(buf.size() - off) +
                      " trailing bytes after matrix");
  CtcLattice lat = CtcLattice::from_rows(std::move(data), frames,
                                         static_cast<int>(width), frame_ms);
  Vocabulary vocab = read_vocab_file(vocab_sidecar_path(path));
  if (vocab.width() != lat.width())
    throw FormatError("'" + path + "': vocabulary width " +
                      std::to_string(vocab.width()) + " != lattice width " +
                      std::to_string(lat.width()));
  return {std::move(lat), std::move(vocab)};
}

inline void save_lattice_json(const std::string& path, const CtcLattice& lat,
                              const Vocabulary& vocab) {
  if (vocab.width() != lat.width())
    throw ValidationError("save_lattice_json: vocabulary width mismatch");
  nlohmann::json j;
  j["format"] = "ctcl-json";
  j["version"] = kLatticeVersion;
  j["frames"] = lat.frames();
  j["width"] = lat.width();
  j["frame_duration_ms"] = lat.frame_duration_ms();
  auto& vs = j["vocabulary"] = nlohmann::json::array();
  for (int id = 0; id < vocab.width(); ++id) vs.push_back(vocab.surface(id));
  auto& rows = j["log_probs"] = nlohmann::json::array();
  for (std::size_t t = 0; t < lat.frames(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : lat.row(t)) row.push_back(is_log_zero(v) ? kJsonLogFloor : v);
    rows.push_back(std::move(row));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  out << j.dump(0) << '\n';
}

inline std::pair<CtcLattice, Vocabulary> load_lattice_json(const std::string& path) {
  auto buf = detail::read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.begin(), buf.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
  try {
    if (j.value("format", "") != "ctcl-json")
      throw FormatError("'" + path + "': bad magic (expected format ctcl-json)");
    if (j.at("version").get<std::uint32_t>() != kLatticeVersion)
      throw FormatError("'" + path + "': unsupported container version");
    const std::size_t frames = j.at("frames").get<std::size_t>();
    const int width = j.at("width").get<int>();
    const double frame_ms = j.at("frame_duration_ms").get<double>();
    std::vector<std::string> surfaces;
    for (const auto& s : j.at("vocabulary")) surfaces.push_back(s.get<std::string>());
    if (static_cast<int>(surfaces.size()) != width)
      throw FormatError("'" + path + "': vocabulary width mismatch");
    std::string blank = surfaces.back();
    surfaces.pop_back();
    Vocabulary vocab = Vocabulary::create(std::move(surfaces), std::move(blank));
    const auto& rows = j.at("log_probs");
    if (rows.size() != frames)
      throw FormatError("'" + path + "': truncated: " + std::to_string(rows.size()) +
                        " rows, header says " + std::to_string(frames));
    std::vector<double> data;
    data.reserve(frames * width);
    for (std::size_t t = 0; t < frames; ++t) {
      if (static_cast<int>(rows[t].size()) != width)
        throw FormatError("'" + path + "': row " + std::to_string(t) +
                          " has wrong width");
      for (const auto& v : rows[t]) {
        double d = v.get<double>();
        data.push_back(d <= kJsonLogFloor ? kLogZero : d);
      }
    }
    CtcLattice lat = CtcLattice::from_rows(std::move(data), frames, width, frame_ms);
    return {std::move(lat), std::move(vocab)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

// Dispatches on the .json extension, else binary.
inline std::pair<CtcLattice, Vocabulary> load_lattice_file(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return load_lattice_json(path);
  return load_lattice_binary(path);
}

}  // namespace latseg

#endif  // LATSEG_LATTICE_IO_HPP_
