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
#include <map>
#include <string>

#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/inpaint/plan.hpp"
#include "singkit/linguistic/model.hpp"

// Stream splicing: overwrite REPLACE ranges of the audio-derived conditioner
// streams with predicted bundles, leaving KEEP ranges bit-identical.

namespace singkit::inpaint {

// The four conditioner streams on a shared frame clock.
struct StreamBundle {
  linguistic::HLFMatrix hlf;
  dsp::FrameSeries logf0;    // ln(f0) voiced, 0 unvoiced
  dsp::FrameSeries vuv;      // {0, 1}
  dsp::FrameSeries loudness; // dB

  int frames() const { return hlf.frames(); }

  void check_aligned(const std::string& what) const {
    dsp::check_same_frames(hlf.frames(), logf0.frames(), what + ": hlf vs logf0");
    dsp::check_same_frames(hlf.frames(), vuv.frames(), what + ": hlf vs vuv");
    dsp::check_same_frames(hlf.frames(), loudness.frames(), what + ": hlf vs loudness");
  }
};

// Hard cuts by default, per the concatenation description. The crossfade
// flag linearly blends log-F0 and loudness over the first/last
// kCrossfadeFrames of each REPLACE segment against the original streams,
// only at boundaries shared with a KEEP segment (between two REPLACE
// segments there is no retained content to fade against). HLF and VUV are
// always hard cuts. Note that crossfading breaks bit-exact idempotence of
// re-splicing; it is an experiment knob, not part of the core contract.
struct SpliceConfig {
  bool crossfade = false;
};

inline constexpr int kCrossfadeFrames = 5;

inline StreamBundle splice_streams(const StreamBundle& orig,
                                   const std::map<std::string, StreamBundle>& repl,
                                   const EditPlan& plan, const SpliceConfig& scfg = {}) {
  orig.check_aligned("splice_streams: orig");
  const int T = orig.frames();
  const EditPlan norm = validate_plan(plan, T);

  StreamBundle out = orig; // KEEP ranges stay untouched copies
  bool any_replace = false;

  for (std::size_t i = 0; i < norm.segments.size(); ++i) {
    const Segment& seg = norm.segments[i];
    if (seg.source == Source::keep) continue;
    any_replace = true;

    const auto it = repl.find(seg.replacement_id);
    if (it == repl.end())
      throw ValueError("splice_streams: unknown replacement_id '" + seg.replacement_id + "'");
    const StreamBundle& b = it->second;
    b.check_aligned("splice_streams: replacement '" + seg.replacement_id + "'");
    if (b.frames() != seg.frames())
      throw ShapeError("splice_streams: segment " + seg.range_str() + " needs " +
                       std::to_string(seg.frames()) + " frames but replacement '" +
                       seg.replacement_id + "' has " + std::to_string(b.frames()));
    if (b.hlf.dims() != orig.hlf.dims())
      throw ShapeError("splice_streams: replacement '" + seg.replacement_id + "' has " +
                       std::to_string(b.hlf.dims()) + " HLF dims, orig has " +
                       std::to_string(orig.hlf.dims()));
    if (b.hlf.features.hop != orig.hlf.features.hop ||
        b.hlf.features.sample_rate != orig.hlf.features.sample_rate)
      throw ConfigError("splice_streams: replacement '" + seg.replacement_id +
                        "' is on a different frame clock than orig");

    const bool fade_left = scfg.crossfade && i > 0 && norm.segments[i - 1].source == Source::keep;
    const bool fade_right = scfg.crossfade && i + 1 < norm.segments.size() &&
                            norm.segments[i + 1].source == Source::keep;

    const int D = orig.hlf.dims();
    for (int f = 0; f < seg.frames(); ++f) {
      const int t = seg.start + f;
      for (int d = 0; d < D; ++d)
        out.hlf.features.data(t, d) = b.hlf.features.data(f, d);
      out.vuv.values[std::size_t(t)] = b.vuv.values[std::size_t(f)];

      // Replacement weight: 1 in the interior, ramping (f+1)/(k+1) over the
      // first/last k frames next to kept content. min() keeps short segments
      // from double-counting the two ramps.
      double w = 1.0;
      if (fade_left) w = std::min(w, double(f + 1) / (kCrossfadeFrames + 1));
      if (fade_right) w = std::min(w, double(seg.frames() - f) / (kCrossfadeFrames + 1));

      const float rep_loud = b.loudness.values[std::size_t(f)];
      out.loudness.values[std::size_t(t)] =
          w >= 1.0 ? rep_loud
                   : float(w * double(rep_loud) +
                           (1.0 - w) * double(orig.loudness.values[std::size_t(t)]));

      // log-F0 only blends where both sides are voiced; mixing with an
      // unvoiced 0 would bend the pitch toward silence instead of smoothing.
      const float rep_lf0 = b.logf0.values[std::size_t(f)];
      const bool both_voiced = b.vuv.values[std::size_t(f)] > 0.5f &&
                               orig.vuv.values[std::size_t(t)] > 0.5f;
      out.logf0.values[std::size_t(t)] =
          (w >= 1.0 || !both_voiced)
              ? rep_lf0
              : float(w * double(rep_lf0) +
                      (1.0 - w) * double(orig.logf0.values[std::size_t(t)]));
    }
  }

  // A matrix containing any predicted frames is marked predicted; an
  // all-KEEP splice keeps the original provenance.
  if (any_replace) out.hlf.provider = linguistic::HlfProvider::predicted;
  return out;
}

} // namespace singkit::inpaint
