// Copyright 2026 The singkit Authors
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

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "singkit/core/errors.hpp"

// Score labels: the phoneme sequence X and per-phoneme duration vector D
// (frames). Symbols map through a vocabulary file `symbol \t id`.

namespace singkit::linguistic {

struct Vocab {
  std::map<std::string, int> to_id;
  std::vector<std::string> to_symbol;

  int size() const { return int(to_symbol.size()); }

  int id_of(const std::string& symbol) const {
    auto it = to_id.find(symbol);
    if (it == to_id.end()) throw ValueError("vocab: unknown symbol '" + symbol + "'");
    return it->second;
  }

  void add(const std::string& symbol, int id) {
    if (id != int(to_symbol.size()))
      throw FormatError("vocab: ids must be dense and ordered, got " + std::to_string(id) +
                        " for '" + symbol + "'");
    if (to_id.count(symbol)) throw FormatError("vocab: duplicate symbol '" + symbol + "'");
    to_id.emplace(symbol, id);
    to_symbol.push_back(symbol);
  }
};

struct ScoreLabel {
  std::vector<int> phonemes;  // ids into a Vocab
  std::vector<int> durations; // frames per phoneme

  int total_frames() const {
    int t = 0;
    for (int d : durations) t += d;
    return t;
  }

  void validate(int vocab_size) const {
    if (phonemes.size() != durations.size())
      throw ShapeError("ScoreLabel: " + std::to_string(phonemes.size()) + " phonemes vs " +
                       std::to_string(durations.size()) + " durations");
    if (phonemes.empty()) throw ValueError("ScoreLabel: empty");
    for (std::size_t i = 0; i < phonemes.size(); ++i) {
      if (phonemes[i] < 0 || phonemes[i] >= vocab_size)
        throw ValueError("ScoreLabel: phoneme id " + std::to_string(phonemes[i]) + " at index " +
                         std::to_string(i) + " outside vocabulary of " +
                         std::to_string(vocab_size));
      if (durations[i] < 1)
        throw ValueError("ScoreLabel: duration at index " + std::to_string(i) +
                         " must be >= 1, got " + std::to_string(durations[i]));
    }
  }
};

inline void write_vocab(const std::string& path, const Vocab& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (int i = 0; i < v.size(); ++i) out << v.to_symbol[std::size_t(i)] << '\t' << i << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline Vocab read_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  Vocab v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string symbol, id_str;
    if (!std::getline(ss, symbol, '\t') || !std::getline(ss, id_str))
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected `symbol\\tid`");
    try {
      v.add(symbol, std::stoi(id_str));
    } catch (const std::invalid_argument&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad id '" + id_str + "'");
    }
  }
  if (v.size() == 0) throw FormatError(path + ": empty vocabulary");
  return v;
}

inline void write_label(const std::string& path, const ScoreLabel& label, const Vocab& v) {
  label.validate(v.size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < label.phonemes.size(); ++i)
    out << v.to_symbol[std::size_t(label.phonemes[i])] << '\t' << label.durations[i] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline ScoreLabel read_label(const std::string& path, const Vocab& v) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  ScoreLabel label;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string symbol, dur_str;
    if (!std::getline(ss, symbol, '\t') || !std::getline(ss, dur_str))
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected `phoneme\\tduration_frames`");
    label.phonemes.push_back(v.id_of(symbol));
    try {
      label.durations.push_back(std::stoi(dur_str));
    } catch (const std::invalid_argument&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad duration '" + dur_str + "'");
    }
  }
  label.validate(v.size());
  return label;
}

} // namespace singkit::linguistic
