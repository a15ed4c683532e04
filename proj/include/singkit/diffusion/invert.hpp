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
#include <complex>
#include <string>
#include <vector>

#include "singkit/core/rng.hpp"
#include "singkit/dsp/mel.hpp"
#include "singkit/dsp/stft.hpp"

// Deterministic mel-to-audio inverters standing in for a neural vocoder:
// an F0-aware harmonic-plus-noise synthesizer (default) and Griffin-Lim
// phase reconstruction (fallback). Both return exactly T*hop samples.

namespace singkit::diffusion {

enum class InvertMode { harmonic_noise, griffin_lim };

inline const char* invert_mode_name(InvertMode m) {
  return m == InvertMode::harmonic_noise ? "harmonic_noise" : "griffin_lim";
}

inline constexpr int kGriffinLimIters = 32;
inline constexpr int kMaxHarmonics = 256;
inline constexpr int kEnvelopeIters = 8;

namespace detail {

// Per-bin power envelope for every frame: exp the log-mel, push the mel
// powers back through the filterbank pseudo-inverse, then sharpen with a few
// Richardson-Lucy multiplicative updates so re-applying the filterbank
// reproduces the mel totals (the plain pseudo-inverse smears tonal peaks
// across neighbouring filters).
inline Mat<double> bin_envelope(const dsp::FeatureMatrix& mel, const dsp::MelConfig& cfg,
                                const dsp::MelFilterbank& fb) {
  const int n_bins = fb.n_bins();
  Mat<double> env(mel.frames(), n_bins);
  std::vector<double> powers(std::size_t(cfg.n_mels), 0.0);
  std::vector<double> m_hat(std::size_t(cfg.n_mels), 0.0);
  const Mat<double>& w = fb.weights();

  // Each bin sits under at most two overlapping triangles; cache which.
  std::vector<std::vector<int>> covering;
  covering.resize(std::size_t(n_bins));
  for (int b = 0; b < n_bins; ++b)
    for (int m = 0; m < cfg.n_mels; ++m)
      if (w(m, b) > 0.0) covering[std::size_t(b)].push_back(m);

  for (int t = 0; t < mel.frames(); ++t) {
    for (int m = 0; m < cfg.n_mels; ++m)
      powers[std::size_t(m)] = std::exp(double(mel.data(t, m)));
    double* row = env.row_ptr(t);
    fb.unapply(powers.data(), row);
    for (int it = 0; it < kEnvelopeIters; ++it) {
      fb.apply(row, m_hat.data());
      for (int b = 0; b < n_bins; ++b) {
        double num = 0.0, den = 0.0;
        for (int m : covering[std::size_t(b)]) {
          const double wt = w(m, b);
          num += wt * powers[std::size_t(m)] / std::max(m_hat[std::size_t(m)], 1e-30);
          den += wt;
        }
        if (den > 1e-12) row[b] *= num / den;
      }
    }
  }
  return env;
}

inline double envelope_at_hz(const Mat<double>& env, int t, double hz, double bin_hz) {
  const double pos = hz / bin_hz;
  const int b = int(pos);
  if (b < 0 || b + 1 >= env.cols) return 0.0;
  const double frac = pos - b;
  return (1.0 - frac) * env(t, b) + frac * env(t, b + 1);
}

} // namespace detail

// mel must carry the same frame clock as f0/vuv; its dims must match
// cfg.n_mels. An all-floor mel returns digital silence by contract.
inline dsp::Waveform invert_mel(const dsp::FeatureMatrix& mel, const dsp::FrameSeries& f0,
                                const dsp::FrameSeries& vuv, InvertMode mode,
                                const dsp::MelConfig& cfg = {}, std::uint64_t seed = 0) {
  const int T = mel.frames();
  if (T < 1) throw ValueError("invert_mel: empty mel");
  dsp::check_same_frames(T, f0.frames(), "invert_mel: mel vs f0");
  dsp::check_same_frames(T, vuv.frames(), "invert_mel: mel vs vuv");
  if (mel.dims() != cfg.n_mels)
    throw ShapeError("invert_mel: mel has " + std::to_string(mel.dims()) +
                     " dims, config says " + std::to_string(cfg.n_mels));
  cfg.validate(mel.sample_rate);

  const int sr = mel.sample_rate;
  const int hop = mel.hop;
  const std::int64_t num_samples = std::int64_t(T) * hop;
  dsp::Waveform out;
  out.sample_rate = sr;
  out.samples.assign(std::size_t(num_samples), 0.0f);

  // All-floor mel means "no signal": return silence rather than floor-level
  // noise.
  const float floor_log = float(std::log(dsp::kMelPowerFloor));
  bool any_signal = false;
  for (float v : mel.data.data) any_signal = any_signal || v > floor_log + 1e-6f;
  if (!any_signal) return out;

  const dsp::MelFilterbank fb(cfg, sr);
  const Mat<double> env = detail::bin_envelope(mel, cfg, fb);
  const double bin_hz = double(sr) / cfg.n_fft;
  Rng rng(mix_seed(seed, 0x696e766572740000ull, std::uint64_t(mode)));

  if (mode == InvertMode::griffin_lim) {
    // Magnitude spectra from the envelope; phases refined by 32 rounds of
    // inverse/forward STFT projection.
    std::vector<std::vector<std::complex<double>>> spec;
    spec.resize(std::size_t(T));
    for (int t = 0; t < T; ++t) {
      spec[std::size_t(t)].resize(std::size_t(fb.n_bins()));
      for (int b = 0; b < fb.n_bins(); ++b) {
        const double mag = std::sqrt(std::max(env(t, b), 0.0));
        const double ph = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        spec[std::size_t(t)][std::size_t(b)] = std::polar(mag, ph);
      }
    }
    for (int it = 0; it < kGriffinLimIters; ++it) {
      const dsp::Waveform w = dsp::istft(spec, cfg.n_fft, cfg.win_length, hop, num_samples, sr);
      const auto rebuilt = dsp::stft_complex(w, cfg.n_fft, cfg.win_length, hop);
      for (int t = 0; t < T; ++t)
        for (int b = 0; b < fb.n_bins(); ++b) {
          const std::complex<double> c = rebuilt[std::size_t(t)][std::size_t(b)];
          const double mag = std::sqrt(std::max(env(t, b), 0.0));
          const double a = std::abs(c);
          spec[std::size_t(t)][std::size_t(b)] = a > 1e-12 ? c * (mag / a) : std::polar(mag, 0.0);
        }
    }
    return dsp::istft(spec, cfg.n_fft, cfg.win_length, hop, num_samples, sr);
  }

  // Harmonic part: per-harmonic phase accumulators, frame-wise F0, amplitudes
  // linearly interpolated between frame centers. A unit sinusoid analyzed by
  // the Hann-windowed STFT peaks at |X|^2 = (A*win/4)^2; inverting that maps
  // the envelope back to time-domain amplitude.
  const double amp_scale = 4.0 / double(cfg.win_length);
  const double fmax_synth = std::min(cfg.fmax, 0.45 * sr);
  const auto frame_voiced = [&](int t) {
    return vuv.values[std::size_t(t)] > 0.0f && f0.values[std::size_t(t)] > 0.0f;
  };

  int k_max = 0;
  Mat<double> amp(T, 0);
  {
    for (int t = 0; t < T; ++t)
      if (frame_voiced(t)) {
        const int k = std::min(kMaxHarmonics,
                               int(fmax_synth / double(f0.values[std::size_t(t)])));
        k_max = std::max(k_max, k);
      }
    amp = Mat<double>(T, k_max); // zero rows for unvoiced frames
    for (int t = 0; t < T; ++t) {
      if (!frame_voiced(t)) continue;
      const double base = double(f0.values[std::size_t(t)]);
      for (int k = 1; k <= k_max; ++k) {
        const double hz = k * base;
        if (hz > fmax_synth) break;
        amp(t, k - 1) = amp_scale * std::sqrt(std::max(detail::envelope_at_hz(env, t, hz, bin_hz), 0.0));
      }
    }
  }

  if (k_max > 0) {
    std::vector<double> phase(std::size_t(k_max), 0.0);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::int64_t i = 0; i < num_samples; ++i) {
      const int t = int(i / hop);
      const int t1 = std::min(t + 1, T - 1);
      const double frac = double(i - std::int64_t(t) * hop) / double(hop);
      const double base = frame_voiced(t) ? double(f0.values[std::size_t(t)]) : 0.0;
      double acc = 0.0;
      for (int k = 0; k < k_max; ++k) {
        const double a = (1.0 - frac) * amp(t, k) + frac * amp(t1, k);
        if (base > 0.0)
          phase[std::size_t(k)] =
              std::fmod(phase[std::size_t(k)] + two_pi * (k + 1) * base / sr, two_pi);
        if (a > 0.0) acc += a * std::sin(phase[std::size_t(k)]);
      }
      out.samples[std::size_t(i)] = float(acc);
    }
  }

  // Noise part: random-phase magnitude inversion on unvoiced frames only;
  // the WOLA resynthesis crossfades at voiced/unvoiced boundaries.
  bool any_noise = false;
  for (int t = 0; t < T; ++t) any_noise = any_noise || !frame_voiced(t);
  if (any_noise) {
    std::vector<std::vector<std::complex<double>>> spec;
    spec.resize(std::size_t(T));
    for (int t = 0; t < T; ++t) {
      spec[std::size_t(t)].assign(std::size_t(fb.n_bins()), {0.0, 0.0});
      if (frame_voiced(t)) continue;
      for (int b = 0; b < fb.n_bins(); ++b) {
        const double mag = std::sqrt(std::max(env(t, b), 0.0));
        const double ph = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        spec[std::size_t(t)][std::size_t(b)] = std::polar(mag, ph);
      }
    }
    const dsp::Waveform noise = dsp::istft(spec, cfg.n_fft, cfg.win_length, hop, num_samples, sr);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += noise.samples[i];
  }
  return out;
}

} // namespace singkit::diffusion
