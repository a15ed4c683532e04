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

#include <cmath>
#include <string>
#include <vector>

#include "singkit/core/mat.hpp"
#include "singkit/corpus/ftr1.hpp"
#include "singkit/dsp/mel.hpp"

// Singer embeddings. The baseline embedder is a deterministic, training-free
// stand-in for a pretrained singer-verification network: per-utterance mean
// and std of the log-mel frames (160 values), projected through a fixed
// seed-0 random orthogonal matrix to emb_dim, L2-normalized.

namespace singkit::pitch {

inline constexpr int kDefaultEmbDim = 64;

struct SingerEmbedding {
  enum class Source { file, baseline };

  std::vector<float> v; // emb_dim values, unit L2 norm
  Source source = Source::baseline;

  int dim() const { return int(v.size()); }

  void validate() const {
    if (v.empty()) throw ValueError("SingerEmbedding: empty");
    double sq = 0.0;
    for (float x : v) {
      if (!std::isfinite(x)) throw ValueError("SingerEmbedding: non-finite component");
      sq += double(x) * double(x);
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-5)
      throw ValueError("SingerEmbedding: L2 norm " + std::to_string(std::sqrt(sq)) +
                       " is not 1 within 1e-5");
  }
};

inline SingerEmbedding baseline_singer_embedding(const dsp::Waveform& w,
                                                 int emb_dim = kDefaultEmbDim,
                                                 const dsp::MelConfig& mel_cfg = {},
                                                 int hop = dsp::kDefaultHop) {
  if (emb_dim < 1) throw ConfigError("baseline_singer_embedding: emb_dim must be >= 1");
  const dsp::FeatureMatrix log_mel = dsp::mel_spectrogram(w, mel_cfg, hop);
  const int t_frames = log_mel.frames(), n_mels = log_mel.dims();

  // Per-dimension mean and population std over the utterance.
  std::vector<double> stats(std::size_t(2 * n_mels), 0.0);
  for (int d = 0; d < n_mels; ++d) {
    double mean = 0.0;
    for (int t = 0; t < t_frames; ++t) mean += double(log_mel.data(t, d));
    mean /= t_frames;
    double var = 0.0;
    for (int t = 0; t < t_frames; ++t) {
      const double dv = double(log_mel.data(t, d)) - mean;
      var += dv * dv;
    }
    stats[std::size_t(d)] = mean;
    stats[std::size_t(n_mels + d)] = std::sqrt(var / t_frames);
  }

  const Mat<double> proj = mat_random_orthogonal(emb_dim, 2 * n_mels, 0);
  std::vector<double> e(std::size_t(emb_dim), 0.0);
  double sq = 0.0;
  for (int i = 0; i < emb_dim; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 2 * n_mels; ++j) acc += proj(i, j) * stats[std::size_t(j)];
    e[std::size_t(i)] = acc;
    sq += acc * acc;
  }
  if (sq < 1e-24) throw ValueError("baseline_singer_embedding: degenerate (all-equal) input");

  SingerEmbedding out;
  out.source = SingerEmbedding::Source::baseline;
  out.v.resize(std::size_t(emb_dim));
  const double inv = 1.0 / std::sqrt(sq);
  for (int i = 0; i < emb_dim; ++i) out.v[std::size_t(i)] = float(e[std::size_t(i)] * inv);
  return out;
}

// Singer embeddings persist as 1×emb_dim FTR1 matrices.
inline void write_singer_ftr1(const std::string& path, const SingerEmbedding& e) {
  e.validate();
  Mat<float> m(1, e.dim());
  for (int i = 0; i < e.dim(); ++i) m(0, i) = e.v[std::size_t(i)];
  corpus::write_ftr1(path, m, 0, 0);
}

inline SingerEmbedding read_singer_ftr1(const std::string& path) {
  const dsp::FeatureMatrix m = corpus::read_ftr1(path);
  if (m.data.rows != 1)
    throw ShapeError("read_singer_ftr1: " + path + " has " + std::to_string(m.data.rows) +
                     " rows, expected 1");
  SingerEmbedding e;
  e.source = SingerEmbedding::Source::file;
  e.v = m.data.data;
  e.validate();
  return e;
}

} // namespace singkit::pitch
