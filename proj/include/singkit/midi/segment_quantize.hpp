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

#include <algorithm>
#include <cmath>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/pitch_units.hpp"
#include "singkit/midi/stream.hpp"

// Built-in note quantizer: a stand-in for the external MIDI extractors so
// Eq. 1 fusion always has a candidate stream. Voiced runs are median-
// smoothed in semitones, split at jumps > 0.6 st, and each segment emits the
// rounded median of its span; segments shorter than min_note_frames merge
// into whichever temporal neighbor is nearer in pitch.

namespace singkit::midi {

namespace detail {

inline double median_of_doubles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

struct Segment {
  int begin = 0; // frame span [begin, end)
  int end = 0;
  double median = 0.0;
  int length() const { return end - begin; }
};

} // namespace detail

inline MidiStream segment_quantize(const dsp::FrameSeries& f0, const dsp::FrameSeries& vuv,
                                   int min_note_frames = 10) {
  dsp::check_same_frames(f0.frames(), vuv.frames(), "segment_quantize");
  if (min_note_frames < 1)
    throw ConfigError("segment_quantize: min_note_frames must be >= 1, got " +
                      std::to_string(min_note_frames));
  const int t_frames = f0.frames();
  MidiStream out;
  out.source_tag = SourceTag::quantizer;
  out.notes.assign(std::size_t(t_frames), 0.0);

  // Semitone track on voiced frames.
  std::vector<double> st(std::size_t(t_frames), 0.0);
  std::vector<bool> voiced(std::size_t(t_frames), false);
  for (int t = 0; t < t_frames; ++t)
    if (vuv.values[std::size_t(t)] > 0.0f && f0.values[std::size_t(t)] > 0.0f) {
      voiced[std::size_t(t)] = true;
      st[std::size_t(t)] = dsp::hz_to_midi(double(f0.values[std::size_t(t)]));
    }

  // 5-frame median smoothing within voiced neighborhoods.
  std::vector<double> smooth = st;
  for (int t = 0; t < t_frames; ++t) {
    if (!voiced[std::size_t(t)]) continue;
    std::vector<double> window;
    for (int k = std::max(0, t - 2); k <= std::min(t_frames - 1, t + 2); ++k)
      if (voiced[std::size_t(k)]) window.push_back(st[std::size_t(k)]);
    smooth[std::size_t(t)] = detail::median_of_doubles(std::move(window));
  }

  // Per voiced run: split at jumps, merge short segments, emit medians.
  int t = 0;
  while (t < t_frames) {
    if (!voiced[std::size_t(t)]) {
      ++t;
      continue;
    }
    int run_end = t;
    while (run_end < t_frames && voiced[std::size_t(run_end)]) ++run_end;

    std::vector<detail::Segment> segs;
    int seg_begin = t;
    for (int i = t + 1; i <= run_end; ++i) {
      const bool boundary =
          i == run_end || std::abs(smooth[std::size_t(i)] - smooth[std::size_t(i) - 1]) > 0.6;
      if (!boundary) continue;
      detail::Segment s;
      s.begin = seg_begin;
      s.end = i;
      std::vector<double> vals(smooth.begin() + seg_begin, smooth.begin() + i);
      s.median = detail::median_of_doubles(std::move(vals));
      segs.push_back(s);
      seg_begin = i;
    }

    // Repeatedly fold the shortest under-length segment into the temporal
    // neighbor whose median is nearer in pitch.
    while (segs.size() > 1) {
      int worst = -1;
      for (std::size_t i = 0; i < segs.size(); ++i)
        if (segs[i].length() < min_note_frames &&
            (worst < 0 || segs[i].length() < segs[std::size_t(worst)].length()))
          worst = int(i);
      if (worst < 0) break;
      const std::size_t w = std::size_t(worst);
      std::size_t into;
      if (w == 0)
        into = 1;
      else if (w == segs.size() - 1)
        into = w - 1;
      else
        into = std::abs(segs[w - 1].median - segs[w].median) <=
                       std::abs(segs[w + 1].median - segs[w].median)
                   ? w - 1
                   : w + 1;
      detail::Segment merged;
      merged.begin = std::min(segs[w].begin, segs[into].begin);
      merged.end = std::max(segs[w].end, segs[into].end);
      std::vector<double> vals(smooth.begin() + merged.begin, smooth.begin() + merged.end);
      merged.median = detail::median_of_doubles(std::move(vals));
      segs[std::min(w, into)] = merged;
      segs.erase(segs.begin() + std::ptrdiff_t(std::max(w, into)));
    }

    for (const auto& s : segs) {
      const double note = double(std::lround(s.median));
      for (int i = s.begin; i < s.end; ++i) out.notes[std::size_t(i)] = note;
    }
    t = run_end;
  }
  return out;
}

} // namespace singkit::midi
