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

#include "singkit/dsp/stft.hpp"

namespace singkit::dsp {

constexpr double kMelPowerFloor = 1e-5;

struct MelConfig {
  int n_fft = 2048;
  int win_length = 2048;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 22050.0;

  void validate(int sample_rate) const {
    if (n_fft < 16 || (n_fft & (n_fft - 1)) != 0)
      throw ConfigError("MelConfig: n_fft must be a power of two >= 16");
    if (win_length < 1 || win_length > n_fft)
      throw ConfigError("MelConfig: win_length must be in [1, n_fft]");
    if (n_mels < 1 || n_mels >= n_fft / 2)
      throw ConfigError("MelConfig: need 1 <= n_mels < n_fft/2");
    if (!(fmin < fmax) || fmax > sample_rate / 2.0 + 1e-9)
      throw ConfigError("MelConfig: need fmin < fmax <= sample_rate/2");
  }
};

inline double hz_to_mel(double f) { return 1127.0 * std::log(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::exp(m / 1127.0) - 1.0); }

// Triangular filters with mel-spaced centers, peak 1.
class MelFilterbank {
public:
  MelFilterbank(const MelConfig& cfg, int sample_rate)
      : n_mels_(cfg.n_mels), n_bins_(cfg.n_fft / 2 + 1) {
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(cfg.fmax);
    edges_hz_.resize(std::size_t(n_mels_) + 2);
    for (int m = 0; m < n_mels_ + 2; ++m)
      edges_hz_[std::size_t(m)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / double(n_mels_ + 1));
    weights_ = Mat<double>(n_mels_, n_bins_);
    const double bin_hz = double(sample_rate) / cfg.n_fft;
    area_.assign(std::size_t(n_mels_), 0.0);
    for (int m = 0; m < n_mels_; ++m) {
      const double lo = edges_hz_[std::size_t(m)];
      const double c = edges_hz_[std::size_t(m) + 1];
      const double hi = edges_hz_[std::size_t(m) + 2];
      for (int b = 0; b < n_bins_; ++b) {
        weights_(m, b) = triangle(double(b) * bin_hz, lo, c, hi);
        area_[std::size_t(m)] += weights_(m, b);
      }
    }
  }

  static double triangle(double f, double lo, double c, double hi) {
    if (f <= lo || f >= hi) return 0.0;
    return f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
  }

  int n_mels() const { return n_mels_; }
  int n_bins() const { return n_bins_; }
  double center_hz(int m) const { return edges_hz_[std::size_t(m) + 1]; }
  double weight_at_hz(int m, double f) const {
    return triangle(f, edges_hz_[std::size_t(m)], edges_hz_[std::size_t(m) + 1],
                    edges_hz_[std::size_t(m) + 2]);
  }
  const Mat<double>& weights() const { return weights_; }

  // power spectrum row -> mel powers
  void apply(const double* power_bins, double* mel_out) const {
    for (int m = 0; m < n_mels_; ++m) {
      const double* wm = weights_.row_ptr(m);
      double acc = 0.0;
      for (int b = 0; b < n_bins_; ++b) acc += wm[b] * power_bins[b];
      mel_out[m] = acc;
    }
  }

  // mel powers -> per-bin power envelope. Each mel total is converted to a
  // per-bin density (dividing by the filter's area) before blending, so
  // apply() of the result reproduces the mel totals for spectra that vary
  // slowly across a filter's support.
  void unapply(const double* mel_powers, double* power_bins) const {
    for (int b = 0; b < n_bins_; ++b) {
      double acc = 0.0, norm = 0.0;
      for (int m = 0; m < n_mels_; ++m) {
        const double w = weights_(m, b);
        if (w <= 0.0) continue;
        acc += w * mel_powers[m] / area_[std::size_t(m)];
        norm += w;
      }
      power_bins[b] = norm > 1e-12 ? acc / norm : 0.0;
    }
  }

private:
  int n_mels_;
  int n_bins_;
  std::vector<double> edges_hz_;
  std::vector<double> area_; // per-filter weight sum over bins
  Mat<double> weights_;
};

// Log mel-spectrogram (natural log, power floored at 1e-5), T×n_mels.
inline FeatureMatrix mel_spectrogram(const Waveform& w, const MelConfig& cfg,
                                     int hop = kDefaultHop) {
  w.validate();
  cfg.validate(w.sample_rate);
  const MelFilterbank fb(cfg, w.sample_rate);
  const Mat<double> power = stft_power(w, cfg.n_fft, cfg.win_length, hop);
  FeatureMatrix out;
  out.hop = hop;
  out.sample_rate = w.sample_rate;
  out.data = Mat<float>(power.rows, cfg.n_mels);
  std::vector<double> mel(std::size_t(cfg.n_mels), 0.0);
  for (int t = 0; t < power.rows; ++t) {
    fb.apply(power.row_ptr(t), mel.data());
    for (int m = 0; m < cfg.n_mels; ++m)
      out.data(t, m) = float(std::log(std::max(mel[std::size_t(m)], kMelPowerFloor)));
  }
  return out;
}

} // namespace singkit::dsp
