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

#include <complex>
#include <vector>

#include "singkit/dsp/fft.hpp"
#include "singkit/dsp/frames.hpp"

namespace singkit::dsp {

inline std::vector<double> hann_window(int length) {
  std::vector<double> w(std::size_t(length), 0.0);
  for (int i = 0; i < length; ++i)
    w[std::size_t(i)] = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / double(length));
  return w;
}

// Complex STFT on the shared frame clock: frame t is centered at t*hop,
// reflect padded, Hann windowed, zero padded to n_fft.
inline std::vector<std::vector<std::complex<double> > > stft_complex(const Waveform& w, int n_fft,
                                                                     int win_length, int hop) {
  if (win_length > n_fft) throw ConfigError("stft: win_length > n_fft");
  const int t_frames = frame_count(std::int64_t(w.samples.size()), hop);
  const std::vector<double> win = hann_window(win_length);
  std::vector<std::vector<std::complex<double> > > frames;
  frames.resize(std::size_t(t_frames));
  for (int t = 0; t < t_frames; ++t) {
    std::vector<std::complex<double> > buf(std::size_t(n_fft), {0.0, 0.0});
    const std::int64_t center = std::int64_t(t) * hop;
    const std::int64_t start = center - win_length / 2;
    const int pad = (n_fft - win_length) / 2;
    for (int i = 0; i < win_length; ++i) {
      const double s = double(sample_reflected(w.samples, start + i));
      buf[std::size_t(pad + i)] = s * win[std::size_t(i)];
    }
    fft_inplace(buf, false);
    buf.resize(std::size_t(n_fft / 2 + 1));
    frames[std::size_t(t)] = std::move(buf);
  }
  return frames;
}

inline Mat<double> stft_power(const Waveform& w, int n_fft, int win_length, int hop) {
  const auto frames = stft_complex(w, n_fft, win_length, hop);
  const int bins = n_fft / 2 + 1;
  Mat<double> p(int(frames.size()), bins);
  for (std::size_t t = 0; t < frames.size(); ++t)
    for (int b = 0; b < bins; ++b) p(int(t), b) = std::norm(frames[t][std::size_t(b)]);
  return p;
}

// Weighted overlap-add inverse of stft_complex. Output has num_samples
// samples (the frame clock's T*hop span, trimmed to the requested length).
inline Waveform istft(const std::vector<std::vector<std::complex<double> > >& frames, int n_fft,
                      int win_length, int hop, std::int64_t num_samples, int sample_rate) {
  const std::vector<double> win = hann_window(win_length);
  std::vector<double> acc(std::size_t(num_samples), 0.0);
  std::vector<double> norm(std::size_t(num_samples), 0.0);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<std::complex<double> > buf(std::size_t(n_fft), {0.0, 0.0});
    for (int b = 0; b <= n_fft / 2; ++b) {
      buf[std::size_t(b)] = frames[t][std::size_t(b)];
      if (b > 0 && b < n_fft / 2) buf[std::size_t(n_fft - b)] = std::conj(frames[t][std::size_t(b)]);
    }
    fft_inplace(buf, true);
    const std::int64_t center = std::int64_t(t) * hop;
    const std::int64_t start = center - win_length / 2;
    const int pad = (n_fft - win_length) / 2;
    for (int i = 0; i < win_length; ++i) {
      const std::int64_t idx = start + i;
      if (idx < 0 || idx >= num_samples) continue;
      acc[std::size_t(idx)] += buf[std::size_t(pad + i)].real() * win[std::size_t(i)];
      norm[std::size_t(idx)] += win[std::size_t(i)] * win[std::size_t(i)];
    }
  }
  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(std::size_t(num_samples));
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = float(norm[i] > 1e-9 ? acc[i] / norm[i] : 0.0);
  return out;
}

} // namespace singkit::dsp
