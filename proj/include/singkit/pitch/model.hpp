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

#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/pitch_units.hpp"
#include "singkit/midi/residual.hpp"
#include "singkit/midi/stream.hpp"
#include "singkit/nn/blocks.hpp"
#include "singkit/nn/params.hpp"
#include "singkit/nn/tape.hpp"
#include "singkit/pitch/singer.hpp"

// Pitch-contour model: (flattened MIDI, HLFs, singer embedding) ->
// (residual log-F0, VUV, loudness), frame-autoregressive. Inputs and outputs
// are already frame-aligned, so the attention of the usual Tacotron-style
// decoder is unnecessary; the prenet over previous-frame outputs and the
// recurrent decoder remain, because contour coherence needs autoregression.

namespace singkit::pitch {

// id 0 is the dedicated rest embedding; ids 1..109 cover notes 12..120.
inline constexpr int kNoteVocab = 110;

inline int note_embedding_id(double note) {
  if (note == 0.0) return 0;
  return int(std::lround(note)) - 11;
}

struct PitchConfig {
  int hlf_dim = 256;
  int emb_dim = kDefaultEmbDim;
  int note_emb_dim = 16;
  int d_model = 64;  // encoder width
  int d_prenet = 32;
  int d_hidden = 64; // decoder GRU state
  int conv_kernel = 5;
  int n_conv_layers = 2;
  double residual_range = 0.2; // tanh bound on |residual log-F0|, ln units

  void validate() const {
    if (hlf_dim < 1 || emb_dim < 1 || note_emb_dim < 1 || d_model < 1 || d_prenet < 1 ||
        d_hidden < 1)
      throw ConfigError("PitchConfig: all widths must be >= 1");
    if (conv_kernel < 1 || conv_kernel % 2 == 0)
      throw ConfigError("PitchConfig: conv_kernel must be odd and >= 1");
    if (n_conv_layers < 0) throw ConfigError("PitchConfig: n_conv_layers must be >= 0");
    if (!(residual_range > 0.0))
      throw ConfigError("PitchConfig: residual_range must be > 0");
  }
};

// One frame-aligned triple; doubles as model output and teacher input.
struct PitchStreams {
  dsp::FrameSeries residual; // residual log-F0, ln units
  dsp::FrameSeries vuv;      // {0, 1}
  dsp::FrameSeries loudness; // dB

  int frames() const { return residual.frames(); }

  void check_aligned(const std::string& what) const {
    dsp::check_same_frames(residual.frames(), vuv.frames(), what + ".vuv");
    dsp::check_same_frames(residual.frames(), loudness.frames(), what + ".loudness");
  }
};

inline double loudness_to_norm(double db) {
  return (db - double(dsp::kLoudnessFloorDb)) / -double(dsp::kLoudnessFloorDb);
}
inline double norm_to_loudness(double n) {
  return n * -double(dsp::kLoudnessFloorDb) + double(dsp::kLoudnessFloorDb);
}

struct PitchGraphOut {
  nn::Var residual;      // T×1
  nn::Var vuv_logits;    // T×1
  nn::Var loudness_norm; // T×1, sigmoid domain [0, 1]
};

// Full differentiable graph. With `teacher` the prenet consumes the supplied
// ground-truth previous frame (teacher forcing); without it the decoder
// consumes its own previous outputs (free-running).
template <class Real>
PitchGraphOut pitch_graph(nn::Tape<Real>& t, nn::Binder<Real>& P, const PitchConfig& cfg,
                          const midi::MidiStream& m, const Mat<Real>& hlf,
                          const std::vector<float>& singer,
                          const PitchStreams* teacher = nullptr) {
  cfg.validate();
  m.validate();
  const int T = m.frames();
  dsp::check_same_frames(T, hlf.rows, "pitch_graph: midi vs hlf");
  if (hlf.cols != cfg.hlf_dim)
    throw ShapeError("pitch_graph: hlf has " + std::to_string(hlf.cols) +
                     " dims, config says " + std::to_string(cfg.hlf_dim));
  if (int(singer.size()) != cfg.emb_dim)
    throw ShapeError("pitch_graph: singer embedding dim " + std::to_string(singer.size()) +
                     ", config says " + std::to_string(cfg.emb_dim));
  if (teacher) {
    teacher->check_aligned("pitch_graph teacher");
    dsp::check_same_frames(T, teacher->frames(), "pitch_graph: midi vs teacher");
  }

  // Encoder: [HLF || note embedding || fractional offset] -> conv stack.
  std::vector<int> ids(std::size_t(T), 0);
  Mat<Real> frac(T, 1);
  for (int i = 0; i < T; ++i) {
    const double note = m.notes[std::size_t(i)];
    ids[std::size_t(i)] = note_embedding_id(note);
    frac(i, 0) = note == 0.0 ? Real(0) : Real(note - std::lround(note));
  }
  nn::Var table = P("note_embed", kNoteVocab, cfg.note_emb_dim);
  nn::Var x = t.concat_cols({t.constant(hlf), t.embedding(table, ids),
                             t.constant(std::move(frac))});
  x = nn::linear(t, P, "in_proj", x, cfg.d_model);
  for (int c = 0; c < cfg.n_conv_layers; ++c) {
    const std::string name = "conv" + std::to_string(c);
    nn::Var w = P(name + ".w", cfg.conv_kernel * cfg.d_model, cfg.d_model);
    nn::Var b = P(name + ".b", 1, cfg.d_model, nn::Init::zeros);
    x = t.relu(t.conv1d(x, w, b, cfg.conv_kernel));
  }

  // Singer conditioning: projected once, added to every encoder frame.
  Mat<Real> emb(1, cfg.emb_dim);
  for (int i = 0; i < cfg.emb_dim; ++i) emb(0, i) = Real(singer[std::size_t(i)]);
  x = t.add_row(x, nn::linear(t, P, "singer_proj", t.constant(std::move(emb)), cfg.d_model));

  // Autoregressive decoder. prev = [residual, vuv, normalized loudness] of
  // the previous frame, zeros for frame 0.
  Mat<Real> h0(1, cfg.d_hidden);
  nn::Var h = t.constant(std::move(h0));
  Mat<Real> prev(1, 3);
  std::vector<nn::Var> rs, vs, ls;
  rs.reserve(std::size_t(T));
  vs.reserve(std::size_t(T));
  ls.reserve(std::size_t(T));
  for (int i = 0; i < T; ++i) {
    nn::Var p = t.relu(nn::linear(t, P, "prenet.fc1", t.constant(prev), cfg.d_prenet));
    p = t.relu(nn::linear(t, P, "prenet.fc2", p, cfg.d_prenet));
    nn::Var inp = t.concat_cols({t.slice_rows(x, i, i + 1), p});
    h = nn::gru_cell(t, P, "gru", inp, h, cfg.d_hidden);

    nn::Var r = t.scale(t.tanh_op(nn::linear(t, P, "head_r", h, 1)), cfg.residual_range);
    nn::Var v = nn::linear(t, P, "head_v", h, 1);
    nn::Var l = t.sigmoid_op(nn::linear(t, P, "head_l", h, 1));
    rs.push_back(r);
    vs.push_back(v);
    ls.push_back(l);

    if (teacher) {
      prev(0, 0) = Real(teacher->residual.values[std::size_t(i)]);
      prev(0, 1) = Real(teacher->vuv.values[std::size_t(i)]);
      prev(0, 2) = Real(loudness_to_norm(double(teacher->loudness.values[std::size_t(i)])));
    } else {
      prev(0, 0) = t.val(r)(0, 0);
      prev(0, 1) = double(t.val(v)(0, 0)) > 0.0 ? Real(1) : Real(0); // sigmoid > 0.5
      prev(0, 2) = t.val(l)(0, 0);
    }
  }
  return {t.vstack(rs), t.vstack(vs), t.vstack(ls)};
}

inline PitchStreams pitch_forward(const midi::MidiStream& m, const dsp::FeatureMatrix& hlf,
                                  const SingerEmbedding& singer, nn::ParamSet<float>& params,
                                  const PitchConfig& cfg,
                                  const PitchStreams* teacher = nullptr) {
  singer.validate();
  nn::Tape<float> tape;
  tape.grad_enabled = false;
  nn::Binder<float> binder(tape, params);
  const PitchGraphOut out = pitch_graph(tape, binder, cfg, m, hlf.data, singer.v, teacher);

  const int T = m.frames();
  PitchStreams s;
  for (dsp::FrameSeries* f : {&s.residual, &s.vuv, &s.loudness}) {
    f->hop = hlf.hop;
    f->sample_rate = hlf.sample_rate;
    f->values.resize(std::size_t(T));
  }
  s.residual.kind = dsp::SeriesKind::residual_logf0;
  s.vuv.kind = dsp::SeriesKind::vuv;
  s.loudness.kind = dsp::SeriesKind::loudness_db;
  const Mat<float>& R = tape.val(out.residual);
  const Mat<float>& V = tape.val(out.vuv_logits);
  const Mat<float>& L = tape.val(out.loudness_norm);
  for (int i = 0; i < T; ++i) {
    s.residual.values[std::size_t(i)] = R(i, 0);
    s.vuv.values[std::size_t(i)] = V(i, 0) > 0.0f ? 1.0f : 0.0f;
    s.loudness.values[std::size_t(i)] = float(norm_to_loudness(double(L(i, 0))));
  }
  return s;
}

// f0_i = midi_to_hz(m_i)·exp(residual_i) where vuv_i = 1 and m_i > 0; else 0.
// The double-residual form preserves the full precision of residual_logf0,
// which keeps the compose/decompose round trip exact; the FrameSeries form is
// for residuals that already went through float32 (model output, FTR1 files).
inline dsp::FrameSeries compose_f0(const midi::MidiStream& m, const std::vector<double>& residual,
                                   const dsp::FrameSeries& vuv) {
  dsp::check_same_frames(m.frames(), int(residual.size()), "compose_f0: midi vs residual");
  dsp::check_same_frames(m.frames(), vuv.frames(), "compose_f0: midi vs vuv");
  const std::vector<double> full = midi::apply_residual(m, residual); // 0 where m_i = 0
  dsp::FrameSeries f0;
  f0.hop = vuv.hop;
  f0.sample_rate = vuv.sample_rate;
  f0.kind = dsp::SeriesKind::f0_hz;
  f0.values.assign(std::size_t(m.frames()), 0.0f);
  for (int i = 0; i < m.frames(); ++i)
    if (vuv.values[std::size_t(i)] > 0.5f) f0.values[std::size_t(i)] = float(full[std::size_t(i)]);
  return f0;
}

inline dsp::FrameSeries compose_f0(const midi::MidiStream& m, const dsp::FrameSeries& residual,
                                   const dsp::FrameSeries& vuv) {
  dsp::check_same_frames(m.frames(), residual.frames(), "compose_f0: midi vs residual");
  std::vector<double> r(residual.values.begin(), residual.values.end());
  dsp::FrameSeries f0 = compose_f0(m, r, vuv);
  f0.hop = residual.hop;
  f0.sample_rate = residual.sample_rate;
  return f0;
}

// ------------------------------------------------------------------ training

struct PitchItem {
  midi::MidiStream midi; // flattened
  Mat<float> hlf;
  SingerEmbedding singer;
  PitchStreams targets;
  std::vector<std::uint8_t> residual_mask; // 1 where the residual is defined
};

struct PitchTrainLog {
  std::vector<double> losses;
  int skipped_all_masked = 0; // items dropped because no residual frame is usable
};

// Composite teacher-forced loss: masked MSE on residual + BCE on VUV +
// 0.1 × MSE on normalized loudness.
template <class Real>
nn::Var pitch_loss(nn::Tape<Real>& t, nn::Binder<Real>& P, const PitchConfig& cfg,
                   const PitchItem& item) {
  const int T = item.midi.frames();
  Mat<Real> hlf = item.hlf.template cast<Real>();
  const PitchGraphOut out = pitch_graph(t, P, cfg, item.midi, hlf, item.singer.v, &item.targets);

  Mat<Real> target_r(T, 1), target_v(T, 1), target_l(T, 1), mask(T, 1);
  for (int i = 0; i < T; ++i) {
    target_r(i, 0) = Real(item.targets.residual.values[std::size_t(i)]);
    target_v(i, 0) = Real(item.targets.vuv.values[std::size_t(i)]);
    target_l(i, 0) = Real(loudness_to_norm(double(item.targets.loudness.values[std::size_t(i)])));
    mask(i, 0) = Real(item.residual_mask[std::size_t(i)]);
  }
  nn::Var loss = t.masked_mse(out.residual, t.constant(std::move(target_r)), mask);
  loss = t.add(loss, t.bce_logits(out.vuv_logits, target_v));
  loss = t.add(loss, t.scale(t.mse(out.loudness_norm, t.constant(std::move(target_l))), 0.1));
  return loss;
}

inline void validate_pitch_item(const PitchItem& item, const PitchConfig& cfg, std::size_t idx) {
  const std::string what = "train_pitch: item " + std::to_string(idx);
  const int T = item.midi.frames();
  item.midi.validate();
  item.singer.validate();
  item.targets.check_aligned(what);
  dsp::check_same_frames(T, item.hlf.rows, what + " midi vs hlf");
  dsp::check_same_frames(T, item.targets.frames(), what + " midi vs targets");
  dsp::check_same_frames(T, int(item.residual_mask.size()), what + " midi vs mask");
  if (item.hlf.cols != cfg.hlf_dim)
    throw ShapeError(what + ": hlf dims " + std::to_string(item.hlf.cols));
  if (item.singer.dim() != cfg.emb_dim)
    throw ShapeError(what + ": singer dim " + std::to_string(item.singer.dim()));
}

inline PitchTrainLog train_pitch(const std::vector<PitchItem>& data, const PitchConfig& cfg,
                                 const nn::TrainConfig& tcfg, nn::ParamSet<float>& params) {
  cfg.validate();
  tcfg.validate();
  if (data.empty()) throw ValueError("train_pitch: empty dataset");

  PitchTrainLog log;
  std::vector<const PitchItem*> usable;
  for (std::size_t i = 0; i < data.size(); ++i) {
    validate_pitch_item(data[i], cfg, i);
    bool any = false;
    for (std::uint8_t v : data[i].residual_mask) any = any || v != 0;
    if (any)
      usable.push_back(&data[i]);
    else
      ++log.skipped_all_masked; // pitched nowhere: nothing to regress
  }
  if (usable.empty()) throw ValueError("train_pitch: every item has an all-masked residual");

  log.losses.reserve(std::size_t(tcfg.steps));
  for (int step = 0; step < tcfg.steps; ++step) {
    const PitchItem& item = *usable[std::size_t(step) % usable.size()];
    const double loss = nn::forward_backward(
        [&](nn::Tape<float>& t, nn::Binder<float>& P) { return pitch_loss(t, P, cfg, item); },
        params);
    nn::clip_global_norm(params, tcfg.clip_norm);
    nn::adam_step(params, tcfg.lr);
    log.losses.push_back(loss);
  }
  return log;
}

} // namespace singkit::pitch
