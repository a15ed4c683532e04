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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singkit/core/errors.hpp"

// Dataset manifest: TSV `utt_id \t singer_id \t wav_path \t label_path \t
// midi_path`. Paths are stored relative to the manifest's directory.

namespace singkit::corpus {

struct ManifestEntry {
  std::string utt_id;
  std::string singer_id;
  std::string wav_path;
  std::string label_path;
  std::string midi_path;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string root; // directory the relative paths resolve against

  std::string resolve(const std::string& rel) const {
    return (std::filesystem::path(root) / rel).string();
  }
};

inline void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& e : entries)
    out << e.utt_id << '\t' << e.singer_id << '\t' << e.wav_path << '\t' << e.label_path << '\t'
        << e.midi_path << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  Manifest m;
  m.root = std::filesystem::path(path).parent_path().string();
  if (m.root.empty()) m.root = ".";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!std::getline(ss, e.utt_id, '\t') || !std::getline(ss, e.singer_id, '\t') ||
        !std::getline(ss, e.wav_path, '\t') || !std::getline(ss, e.label_path, '\t') ||
        !std::getline(ss, e.midi_path))
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected `utt_id\\tsinger_id\\twav\\tlabel\\tmidi`");
    m.entries.push_back(std::move(e));
  }
  return m;
}

} // namespace singkit::corpus
