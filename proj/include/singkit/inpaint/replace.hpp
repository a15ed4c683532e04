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

#include "singkit/core/errors.hpp"
#include "singkit/diffusion/model.hpp"
#include "singkit/inpaint/splice.hpp"
#include "singkit/linguistic/label.hpp"
#include "singkit/linguistic/model.hpp"
#include "singkit/midi/stream.hpp"
#include "singkit/pitch/model.hpp"
#include "singkit/pitch/singer.hpp"

// Builds the predicted streams for one REPLACE segment from its text label
// and MIDI: HLFs from the linguistic model, residual/VUV/loudness from the
// pitch model, and log-F0 by composing the residual back onto the MIDI.

namespace singkit::inpaint {

inline StreamBundle build_replacement(const linguistic::ScoreLabel& label,
                                      const midi::MidiStream& midi_segment,
                                      const pitch::SingerEmbedding& singer,
                                      nn::ParamSet<float>& ling_params,
                                      const linguistic::LinguisticConfig& ling_cfg,
                                      nn::ParamSet<float>& pitch_params,
                                      const pitch::PitchConfig& pitch_cfg,
                                      int hop = dsp::kDefaultHop,
                                      int sample_rate = dsp::kDefaultSampleRate) {
  label.validate(ling_cfg.vocab_size);
  midi_segment.validate();
  const int total = label.total_frames();
  if (total != midi_segment.frames())
    throw ShapeError("build_replacement: label durations sum to " + std::to_string(total) +
                     " frames but the MIDI segment has " +
                     std::to_string(midi_segment.frames()));

  StreamBundle b;
  b.hlf = linguistic::linguistic_forward(label, ling_params, ling_cfg, hop, sample_rate);
  const pitch::PitchStreams streams =
      pitch::pitch_forward(midi_segment, b.hlf.features, singer, pitch_params, pitch_cfg);
  b.vuv = streams.vuv;
  b.loudness = streams.loudness;
  const dsp::FrameSeries f0 = pitch::compose_f0(midi_segment, streams.residual, streams.vuv);
  b.logf0 = diffusion::make_logf0(f0, streams.vuv);
  b.check_aligned("build_replacement");
  return b;
}

// The spliced bundle plus a singer pick is everything the synthesizer needs.
inline diffusion::Conditioner to_conditioner(const StreamBundle& b,
                                             const pitch::SingerEmbedding& singer) {
  diffusion::Conditioner cond;
  cond.hlf = b.hlf.features;
  cond.logf0 = b.logf0;
  cond.vuv = b.vuv;
  cond.loudness = b.loudness;
  cond.singer = singer;
  return cond;
}

} // namespace singkit::inpaint
