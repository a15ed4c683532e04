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
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "singkit/core/rng.hpp"
#include "singkit/corpus/manifest.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/pitch_units.hpp"
#include "singkit/dsp/wav.hpp"
#include "singkit/linguistic/label.hpp"
#include "singkit/midi/stream.hpp"

// Deterministic synthetic singing corpus. Each utterance is a sequence of
// sung vowels on integer MIDI notes (harmonic source shaped by vowel
// formants, with vibrato and slow pitch wobble), separated by occasional
// unvoiced consonants and silence at both ends. The generator emits matched
// wav / score-label / frame-level MIDI triples, so every downstream stage
// has exact ground truth: phoneme durations sum to the frame count, vowel
// frames carry the sung note, everything else is a rest.

namespace singkit::corpus {

struct SynthCorpusConfig {
  int n_singers = 2;
  int n_utterances = 4; // per singer
  double utt_seconds = 3.0;
  int sample_rate = dsp::kDefaultSampleRate;
  int hop = dsp::kDefaultHop;
  double vibrato_depth_st = 0.15;
  double vibrato_hz = 5.5;
  double wobble_st = 0.05; // slow random drift, semitones
  std::uint64_t seed = 0;

  void validate() const {
    if (n_singers < 1) throw ConfigError("SynthCorpusConfig: n_singers must be >= 1");
    if (n_utterances < 1) throw ConfigError("SynthCorpusConfig: n_utterances must be >= 1");
    if (!(utt_seconds >= 1.0 && utt_seconds <= 30.0))
      throw ConfigError("SynthCorpusConfig: utt_seconds must be in [1, 30]");
    if (sample_rate < 8000) throw ConfigError("SynthCorpusConfig: sample_rate must be >= 8000");
    if (hop < 1) throw ConfigError("SynthCorpusConfig: hop must be >= 1");
    if (!(vibrato_depth_st >= 0.0 && vibrato_depth_st <= 1.0))
      throw ConfigError("SynthCorpusConfig: vibrato_depth_st must be in [0, 1]");
    if (!(vibrato_hz > 0.0 && vibrato_hz < 12.0))
      throw ConfigError("SynthCorpusConfig: vibrato_hz must be in (0, 12)");
    if (!(wobble_st >= 0.0 && wobble_st <= 0.5))
      throw ConfigError("SynthCorpusConfig: wobble_st must be in [0, 0.5]");
  }
};

namespace detail {

constexpr double kPi = 3.14159265358979323846;

struct Formant {
  double hz, bw, gain;
};

struct PhonemeSpec {
  const char* symbol;
  bool voiced;
  Formant f[3];         // voiced only
  double noise_hz = 0;  // unvoiced band center
  double noise_bw = 0;  // unvoiced bandwidth
  bool burst = false;   // plosive: decaying burst instead of sustained noise
  double amp = 1.0;     // level relative to the vowel reference
};

// Fixed inventory; vocabulary ids follow table order, silence first.
inline const std::vector<PhonemeSpec>& phoneme_table() {
  static const std::vector<PhonemeSpec> table = {
      {"sil", false, {}, 0, 0, false, 0.0},
      {"a", true, {{700, 130, 1.0}, {1220, 140, 0.50}, {2600, 200, 0.18}}},
      {"e", true, {{440, 110, 1.0}, {1960, 160, 0.35}, {2750, 220, 0.15}}},
      {"i", true, {{280, 90, 1.0}, {2250, 160, 0.25}, {3050, 240, 0.12}}},
      {"o", true, {{430, 110, 1.0}, {850, 130, 0.45}, {2700, 220, 0.08}}},
      {"u", true, {{320, 90, 1.0}, {750, 120, 0.35}, {2500, 220, 0.05}}},
      {"n", true, {{260, 90, 1.0}, {1250, 220, 0.12}, {2400, 260, 0.05}}, 0, 0, false, 0.6},
      {"s", false, {}, 6200, 2200, false, 0.10},
      {"sh", false, {}, 3200, 1400, false, 0.12},
      {"k", false, {}, 2300, 1600, true, 0.14},
      {"t", false, {}, 4300, 1800, true, 0.14},
  };
  return table;
}

constexpr int kSilId = 0;
constexpr int kFirstVowel = 1, kLastVowel = 6; // a..n
constexpr int kFirstCons = 7, kLastCons = 10;  // s..t

// Constant-peak-gain biquad bandpass (RBJ cookbook).
struct Bandpass {
  double b0, b1, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  Bandpass(double fc, double bw, int sr) {
    const double w0 = 2.0 * kPi * std::min(fc, 0.45 * sr) / sr;
    const double q = std::max(0.3, fc / bw);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b1 = 0.0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Raised-cosine attack/release so segment edges never click.
inline double edge_envelope(std::int64_t i, std::int64_t n, std::int64_t att, std::int64_t rel) {
  att = std::min(att, n / 3);
  rel = std::min(rel, n / 3);
  double g = 1.0;
  if (att > 0 && i < att) g *= 0.5 - 0.5 * std::cos(kPi * double(i) / double(att));
  if (rel > 0 && i >= n - rel) g *= 0.5 - 0.5 * std::cos(kPi * double(n - 1 - i) / double(rel));
  return g;
}

inline double formant_response(const PhonemeSpec& ph, double f_hz, double scale) {
  double g = 0.0;
  for (const Formant& fm : ph.f) {
    if (fm.gain <= 0.0) continue;
    const double fc = fm.hz * scale;
    const double half_bw = 0.5 * fm.bw;
    const double d = f_hz - fc;
    g += fm.gain * half_bw * half_bw / (d * d + half_bw * half_bw);
  }
  return g;
}

} // namespace detail

// Per-singer voice parameters, derived from the corpus seed alone.
struct SingerParams {
  int register_lo = 0, register_hi = 0; // integer MIDI note range
  double formant_scale = 1.0;           // vocal-tract length proxy
  double level = 0.65;                  // base amplitude
};

inline SingerParams singer_params(const SynthCorpusConfig& cfg, int singer) {
  Rng rng(mix_seed(cfg.seed, 0x53696e67ull /* "Sing" */, std::uint64_t(singer)));
  SingerParams p;
  // Keep every register well inside the F0 extractor's [65, 1000] Hz span.
  const int center = int(rng.uniform_int(52, 70));
  p.register_lo = std::max(45, center - 7);
  p.register_hi = std::min(79, center + 7);
  p.formant_scale = rng.uniform(0.88, 1.12);
  p.level = rng.uniform(0.55, 0.75);
  return p;
}

struct UttData {
  std::string utt_id;
  std::string singer_id;
  dsp::Waveform wav;
  linguistic::ScoreLabel label;
  midi::MidiStream midi; // frame-level ground truth, frames() == label.total_frames()
};

inline linguistic::Vocab build_vocab() {
  linguistic::Vocab v;
  const auto& table = detail::phoneme_table();
  for (int i = 0; i < int(table.size()); ++i) v.add(table[std::size_t(i)].symbol, i);
  return v;
}

inline UttData generate_utterance(const SynthCorpusConfig& cfg, int singer, int utt) {
  cfg.validate();
  const SingerParams sp = singer_params(cfg, singer);
  Rng rng(mix_seed(cfg.seed, std::uint64_t(singer) + 1, std::uint64_t(utt) + 1));
  const auto& table = detail::phoneme_table();

  UttData out;
  char name[32];
  std::snprintf(name, sizeof(name), "s%02d", singer);
  out.singer_id = name;
  std::snprintf(name, sizeof(name), "s%02d_u%02d", singer, utt);
  out.utt_id = name;

  // Phoneme plan. Durations are whole frames and sum exactly to the frame
  // count of the rendered waveform (samples = frames * hop).
  const int target_frames =
      std::max(60, int(std::lround(cfg.utt_seconds * cfg.sample_rate / cfg.hop)));
  struct Seg {
    int phoneme;
    int frames;
    int note; // 0 = rest
  };
  std::vector<Seg> segs;
  const int start_sil = std::min(int(rng.uniform_int(25, 35)), target_frames / 6);
  const int end_sil = std::min(int(rng.uniform_int(25, 35)), target_frames / 6);
  const int budget = target_frames - start_sil - end_sil;
  segs.push_back({detail::kSilId, start_sil, 0});

  int note = int(rng.uniform_int(sp.register_lo, sp.register_hi));
  int used = 0;
  int last_vowel = -1;
  while (budget - used >= 130) {
    if (rng.uniform() < 0.25) {
      const int c = int(rng.uniform_int(detail::kFirstCons, detail::kLastCons));
      const int dur = int(rng.uniform_int(6, 12));
      segs.push_back({c, dur, 0});
      used += dur;
    }
    const int vowel = int(rng.uniform_int(detail::kFirstVowel, detail::kLastVowel));
    const int dur = int(rng.uniform_int(35, 85));
    segs.push_back({vowel, dur, note});
    last_vowel = int(segs.size()) - 1;
    used += dur;
    // Random walk over the register; never repeat a note so adjacent
    // segments always differ in pitch.
    int step = int(rng.uniform_int(1, 4));
    if (rng.uniform() < 0.5) step = -step;
    int next = note + step;
    if (next > sp.register_hi || next < sp.register_lo) next = note - step;
    note = std::clamp(next, sp.register_lo, sp.register_hi);
  }
  int leftover = budget - used;
  if (last_vowel < 0) {
    segs.push_back({detail::kFirstVowel, leftover, note});
    last_vowel = int(segs.size()) - 1;
  } else if (leftover >= 45) {
    segs.push_back({int(rng.uniform_int(detail::kFirstVowel, detail::kLastVowel)), leftover, note});
    last_vowel = int(segs.size()) - 1;
  } else if (leftover > 0) {
    segs[std::size_t(last_vowel)].frames += leftover;
  }
  segs.push_back({detail::kSilId, end_sil, 0});

  // Render.
  const int sr = cfg.sample_rate;
  const std::int64_t n_samples = std::int64_t(target_frames) * cfg.hop;
  out.wav.sample_rate = sr;
  out.wav.samples.assign(std::size_t(n_samples), 0.0f);
  out.midi.source_tag = midi::SourceTag::phoneme_based;
  out.midi.notes.assign(std::size_t(target_frames), 0.0);

  const double wobble_hz = rng.uniform(0.4, 0.8);
  const double wobble_phase = rng.uniform(0.0, 2.0 * detail::kPi);
  const double fmax_hz = std::min(10000.0, 0.45 * sr);
  std::vector<double> phases(std::size_t(std::max(1.0, fmax_hz / 80.0)) + 2, 0.0);
  std::vector<double> amps(phases.size(), 0.0);

  std::int64_t cursor = 0; // sample index of current segment start
  int frame_cursor = 0;
  for (const Seg& seg : segs) {
    const detail::PhonemeSpec& ph = table[std::size_t(seg.phoneme)];
    const std::int64_t seg_samples = std::int64_t(seg.frames) * cfg.hop;
    out.label.phonemes.push_back(seg.phoneme);
    out.label.durations.push_back(seg.frames);
    for (int f = 0; f < seg.frames; ++f)
      out.midi.notes[std::size_t(frame_cursor + f)] = double(seg.note);

    if (ph.voiced && seg.note > 0) {
      const double vib_depth = cfg.vibrato_depth_st * rng.uniform(0.8, 1.2);
      const double vib_hz = cfg.vibrato_hz + rng.uniform(-0.6, 0.6);
      const double vib_phase = rng.uniform(0.0, 2.0 * detail::kPi);
      const double level = sp.level * ph.amp * rng.uniform(0.85, 1.0);
      const double f_nom = dsp::midi_to_hz(double(seg.note));
      const int n_harm = std::max(1, std::min(int(phases.size()) - 1,
                                              int(fmax_hz / (f_nom * std::exp2(0.3 / 12.0)))));
      // Harmonic amplitudes: 1/sqrt(k) source tilt shaped by the vowel
      // formants, normalized so the worst-case peak equals `level`.
      double sum = 0.0, amax = 0.0;
      for (int k = 1; k <= n_harm; ++k) {
        amps[std::size_t(k)] = detail::formant_response(ph, k * f_nom, sp.formant_scale) /
                               std::sqrt(double(k));
        amax = std::max(amax, amps[std::size_t(k)]);
      }
      // Glottal sources keep the fundamental strong no matter where the
      // formants sit; without this floor a vowel whose energy lands on an
      // even harmonic reads an octave high in any period detector.
      amps[1] = std::max(amps[1], 0.5 * amax);
      for (int k = 1; k <= n_harm; ++k) sum += amps[std::size_t(k)];
      for (int k = 1; k <= n_harm; ++k) amps[std::size_t(k)] *= level / std::max(sum, 1e-9);

      const std::int64_t att = std::int64_t(std::lround(0.015 * sr));
      const std::int64_t rel = std::int64_t(std::lround(0.025 * sr));
      const double vib_ramp_samples = 0.12 * sr;
      for (std::int64_t i = 0; i < seg_samples; ++i) {
        const double t_abs = double(cursor + i) / sr;
        const double ramp = std::min(1.0, double(i) / vib_ramp_samples);
        const double semi = double(seg.note) +
                            ramp * vib_depth * std::sin(2.0 * detail::kPi * vib_hz * double(i) / sr +
                                                        vib_phase) +
                            cfg.wobble_st * std::sin(2.0 * detail::kPi * wobble_hz * t_abs + wobble_phase);
        const double w = 2.0 * detail::kPi * dsp::midi_to_hz(semi) / sr;
        double acc = 0.0;
        for (int k = 1; k <= n_harm; ++k) {
          double& phi = phases[std::size_t(k)];
          phi += k * w;
          if (phi > 2.0 * detail::kPi) phi -= 2.0 * detail::kPi * std::floor(phi / (2.0 * detail::kPi));
          acc += amps[std::size_t(k)] * std::sin(phi);
        }
        out.wav.samples[std::size_t(cursor + i)] =
            float(acc * detail::edge_envelope(i, seg_samples, att, rel));
      }
    } else if (!ph.voiced && ph.noise_hz > 0.0) {
      detail::Bandpass bp(ph.noise_hz, ph.noise_bw, sr);
      const double level = sp.level * ph.amp;
      const std::int64_t att = std::int64_t(std::lround(0.003 * sr));
      const std::int64_t rel = std::int64_t(std::lround(0.010 * sr));
      const double burst_tau = 0.018 * sr;
      for (std::int64_t i = 0; i < seg_samples; ++i) {
        double g = detail::edge_envelope(i, seg_samples, att, rel);
        if (ph.burst) g *= std::exp(-double(i) / burst_tau);
        out.wav.samples[std::size_t(cursor + i)] =
            float(level * g * bp.step(rng.gaussian()) * 2.0);
      }
    }
    // sil: leave zeros.
    cursor += seg_samples;
    frame_cursor += seg.frames;
  }

  out.label.validate(int(table.size()));
  out.midi.validate();
  return out;
}

// Writes wav/, labels/, midi/, vocab.tsv, and manifest.tsv under out_dir.
inline Manifest generate_corpus(const SynthCorpusConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "labels");
  fs::create_directories(fs::path(out_dir) / "midi");

  const linguistic::Vocab vocab = build_vocab();
  linguistic::write_vocab((fs::path(out_dir) / "vocab.tsv").string(), vocab);

  std::vector<ManifestEntry> entries;
  for (int s = 0; s < cfg.n_singers; ++s) {
    for (int u = 0; u < cfg.n_utterances; ++u) {
      const UttData data = generate_utterance(cfg, s, u);
      ManifestEntry e;
      e.utt_id = data.utt_id;
      e.singer_id = data.singer_id;
      e.wav_path = "wav/" + data.utt_id + ".wav";
      e.label_path = "labels/" + data.utt_id + ".lab";
      e.midi_path = "midi/" + data.utt_id + ".mid.tsv";
      dsp::write_wav((fs::path(out_dir) / e.wav_path).string(), data.wav);
      linguistic::write_label((fs::path(out_dir) / e.label_path).string(), data.label, vocab);
      midi::write_midi_tsv((fs::path(out_dir) / e.midi_path).string(), data.midi);
      entries.push_back(e);
    }
  }
  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), entries);

  Manifest m;
  m.entries = entries;
  m.root = out_dir;
  return m;
}

} // namespace singkit::corpus
