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

#include <string>
#include <vector>

#include "singkit/dsp/frames.hpp"
#include "singkit/linguistic/label.hpp"
#include "singkit/nn/blocks.hpp"
#include "singkit/nn/params.hpp"
#include "singkit/nn/tape.hpp"

// Linguistic model: phoneme sequence + durations -> frame-aligned HLFs.
// Phoneme embedding -> encoder blocks -> length regulator -> decoder blocks
// -> projection. The duration predictor of the usual FastSpeech-style stack
// is removed: durations are always supplied.

namespace singkit::linguistic {

enum class HlfProvider { file, pseudo, predicted };

inline const char* hlf_provider_name(HlfProvider p) {
  switch (p) {
    case HlfProvider::file: return "file";
    case HlfProvider::pseudo: return "pseudo";
    case HlfProvider::predicted: return "predicted";
  }
  return "?";
}

// Frame-aligned linguistic features plus where they came from.
struct HLFMatrix {
  dsp::FeatureMatrix features;
  HlfProvider provider = HlfProvider::file;

  int frames() const { return features.frames(); }
  int dims() const { return features.dims(); }
};

struct LinguisticConfig {
  int vocab_size = 0; // must be set from the vocabulary
  int hlf_dim = 256;
  int d_model = 128;
  int n_heads = 2;
  int d_ff = 256;
  int n_enc_blocks = 2;
  int n_dec_blocks = 2;

  void validate() const {
    if (vocab_size < 1) throw ConfigError("LinguisticConfig: vocab_size must be >= 1");
    if (hlf_dim < 1) throw ConfigError("LinguisticConfig: hlf_dim must be >= 1");
    if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0)
      throw ConfigError("LinguisticConfig: d_model must be a positive multiple of n_heads");
    if (d_ff < 1) throw ConfigError("LinguisticConfig: d_ff must be >= 1");
    if (n_enc_blocks < 1 || n_dec_blocks < 1)
      throw ConfigError("LinguisticConfig: need at least one encoder and one decoder block");
  }
};

// Plain-matrix length regulator; the tape op mirrors these exact semantics.
// Row n of h is repeated durations[n] times, in order.
template <class Real>
Mat<Real> length_regulate(const Mat<Real>& h, const std::vector<int>& durations) {
  if (int(durations.size()) != h.rows)
    throw ShapeError("length_regulate: " + std::to_string(durations.size()) + " durations for " +
                     std::to_string(h.rows) + " rows");
  int total = 0;
  for (std::size_t n = 0; n < durations.size(); ++n) {
    if (durations[n] <= 0)
      throw ValueError("length_regulate: duration at index " + std::to_string(n) +
                       " must be >= 1, got " + std::to_string(durations[n]));
    total += durations[n];
  }
  Mat<Real> out(total, h.cols);
  int t = 0;
  for (std::size_t n = 0; n < durations.size(); ++n)
    for (int k = 0; k < durations[n]; ++k, ++t)
      for (int j = 0; j < h.cols; ++j) out(t, j) = h(int(n), j);
  return out;
}

// Builds the full differentiable graph for one utterance; returns the
// T×hlf_dim output Var. Shared by training and inference.
template <class Real>
nn::Var linguistic_graph(nn::Tape<Real>& t, nn::Binder<Real>& P, const LinguisticConfig& cfg,
                         const ScoreLabel& label) {
  cfg.validate();
  label.validate(cfg.vocab_size);
  const int n_ph = int(label.phonemes.size());

  nn::Var table = P("embed", cfg.vocab_size, cfg.d_model);
  nn::Var h = t.embedding(table, label.phonemes);
  h = t.add(h, t.constant(nn::positional_encoding<Real>(n_ph, cfg.d_model)));
  for (int b = 0; b < cfg.n_enc_blocks; ++b)
    h = nn::transformer_block(t, P, "enc" + std::to_string(b), h, cfg.n_heads, cfg.d_ff);

  nn::Var i = t.length_regulate(h, label.durations);
  // Fresh positional information on the frame clock; the paper-side stack
  // only positions phonemes.
  i = t.add(i, t.constant(nn::positional_encoding<Real>(label.total_frames(), cfg.d_model)));
  for (int b = 0; b < cfg.n_dec_blocks; ++b)
    i = nn::transformer_block(t, P, "dec" + std::to_string(b), i, cfg.n_heads, cfg.d_ff);

  return nn::linear(t, P, "proj", i, cfg.hlf_dim);
}

inline HLFMatrix linguistic_forward(const ScoreLabel& label, nn::ParamSet<float>& params,
                                    const LinguisticConfig& cfg, int hop = dsp::kDefaultHop,
                                    int sample_rate = dsp::kDefaultSampleRate) {
  nn::Tape<float> tape;
  tape.grad_enabled = false;
  nn::Binder<float> binder(tape, params);
  const nn::Var y = linguistic_graph(tape, binder, cfg, label);

  HLFMatrix out;
  out.provider = HlfProvider::predicted;
  out.features.hop = hop;
  out.features.sample_rate = sample_rate;
  out.features.data = tape.val(y);
  return out;
}

// ------------------------------------------------------------------ training

struct LinguisticItem {
  ScoreLabel label;
  Mat<float> target; // T×hlf_dim, T = sum of durations
};

using nn::TrainConfig;

inline void validate_linguistic_dataset(const std::vector<LinguisticItem>& data,
                                        const LinguisticConfig& cfg) {
  if (data.empty()) throw ValueError("train_linguistic: empty dataset");
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].label.validate(cfg.vocab_size);
    if (data[i].label.total_frames() != data[i].target.rows)
      throw ShapeError("train_linguistic: item " + std::to_string(i) + " has sum(D) = " +
                       std::to_string(data[i].label.total_frames()) + " but target rows = " +
                       std::to_string(data[i].target.rows));
    if (data[i].target.cols != cfg.hlf_dim)
      throw ShapeError("train_linguistic: item " + std::to_string(i) + " target cols = " +
                       std::to_string(data[i].target.cols) + ", expected hlf_dim = " +
                       std::to_string(cfg.hlf_dim));
    if (!data[i].target.all_finite())
      throw ValueError("train_linguistic: non-finite target in item " + std::to_string(i));
  }
}

// MSE training loop, one utterance per step, round-robin. Returns the loss
// at every step (deterministic given the ParamSet seed).
inline std::vector<double> train_linguistic(const std::vector<LinguisticItem>& data,
                                            const LinguisticConfig& cfg, const TrainConfig& tcfg,
                                            nn::ParamSet<float>& params) {
  cfg.validate();
  tcfg.validate();
  validate_linguistic_dataset(data, cfg);

  std::vector<double> losses;
  losses.reserve(std::size_t(tcfg.steps));
  for (int step = 0; step < tcfg.steps; ++step) {
    const LinguisticItem& item = data[std::size_t(step) % data.size()];
    const double loss = nn::forward_backward(
        [&](nn::Tape<float>& t, nn::Binder<float>& P) {
          const nn::Var pred = linguistic_graph(t, P, cfg, item.label);
          return t.mse(pred, t.constant(item.target));
        },
        params);
    nn::clip_global_norm(params, tcfg.clip_norm);
    nn::adam_step(params, tcfg.lr);
    losses.push_back(loss);
  }
  return losses;
}

} // namespace singkit::linguistic
