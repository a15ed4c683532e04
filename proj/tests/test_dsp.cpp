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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "singkit/core/rng.hpp"
#include "singkit/dsp/fft.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/loudness.hpp"
#include "singkit/dsp/mel.hpp"
#include "singkit/dsp/pitch.hpp"
#include "singkit/dsp/pitch_units.hpp"
#include "singkit/dsp/stft.hpp"
#include "singkit/dsp/wav.hpp"

using namespace singkit;
using namespace singkit::dsp;

namespace {

Waveform make_sine(double freq, double seconds, double amp, int sr = kDefaultSampleRate) {
  Waveform w;
  w.sample_rate = sr;
  const int n = int(seconds * sr);
  w.samples.resize(std::size_t(n));
  for (int i = 0; i < n; ++i)
    w.samples[std::size_t(i)] = float(amp * std::sin(2.0 * M_PI * freq * i / sr));
  return w;
}

Waveform make_noise(double seconds, double amp, std::uint64_t seed,
                    int sr = kDefaultSampleRate) {
  Waveform w;
  w.sample_rate = sr;
  Rng rng(seed);
  const int n = int(seconds * sr);
  w.samples.resize(std::size_t(n));
  for (auto& s : w.samples) s = float(amp * rng.uniform(-1.0, 1.0));
  return w;
}

} // namespace

// ---------------------------------------------------------------- frame clock

TEST_CASE("frame_count matches ceil division") {
  CHECK(frame_count(220, 220) == 1);
  CHECK(frame_count(221, 220) == 2);
  CHECK(frame_count(44100, 220) == 201);
  CHECK(frame_count(1, 220) == 1);
  CHECK_THROWS_AS(frame_count(100, 0), ConfigError);
  CHECK_THROWS_AS(frame_count(0, 220), ValueError);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t n = rng.uniform_int(1, 1000000);
    const int hop = int(rng.uniform_int(1, 4096));
    const int t = frame_count(n, hop);
    CHECK(std::int64_t(t - 1) * hop < n);
    CHECK(std::int64_t(t) * hop >= n);
  }
}

TEST_CASE("reflect indexing mirrors without repeating edges") {
  // n = 4: ... 2 1 | 0 1 2 3 | 2 1 0 1 ...
  CHECK(reflect_index(-1, 4) == 1);
  CHECK(reflect_index(-2, 4) == 2);
  CHECK(reflect_index(0, 4) == 0);
  CHECK(reflect_index(3, 4) == 3);
  CHECK(reflect_index(4, 4) == 2);
  CHECK(reflect_index(5, 4) == 1);
  CHECK(reflect_index(6, 4) == 0);
  CHECK(reflect_index(0, 1) == 0);
  CHECK(reflect_index(100, 1) == 0);
}

TEST_CASE("all extractors share the frame clock") {
  for (double seconds : {0.31, 0.5, 1.003}) {
    Waveform w = make_sine(220.0, seconds, 0.8);
    const int t = frame_count(std::int64_t(w.samples.size()), kDefaultHop);
    CHECK(extract_loudness(w).frames() == t);
    F0Result f0 = extract_f0(w);
    CHECK(f0.f0.frames() == t);
    CHECK(f0.vuv.frames() == t);
    CHECK(mel_spectrogram(w, MelConfig{}).frames() == t);
  }
}

// ------------------------------------------------------------------------ fft

TEST_CASE("fft round trip and impulse spectrum") {
  Rng rng(11);
  std::vector<std::complex<double>> x(256);
  for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  auto y = x;
  fft_inplace(y, false);
  fft_inplace(y, true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(y[i].real() - x[i].real()) < 1e-10);
    CHECK(std::abs(y[i].imag() - x[i].imag()) < 1e-10);
  }

  std::vector<std::complex<double>> d(64, 0.0);
  d[0] = 1.0;
  fft_inplace(d, false);
  for (const auto& v : d) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("stft locates a pure tone in the expected bin") {
  const double freq = 1000.0;
  Waveform w = make_sine(freq, 0.5, 0.9);
  Mat<double> p = stft_power(w, 2048, 2048, kDefaultHop);
  const int expected_bin = int(std::lround(freq * 2048.0 / w.sample_rate));
  for (int t = 5; t < p.rows - 5; ++t) {
    int arg = 0;
    for (int j = 1; j < p.cols; ++j)
      if (p(t, j) > p(t, arg)) arg = j;
    CHECK(std::abs(arg - expected_bin) <= 1);
  }
}

TEST_CASE("istft reconstructs the signal") {
  Waveform w = make_noise(0.25, 0.5, 3);
  auto frames = stft_complex(w, 2048, 2048, kDefaultHop);
  Waveform r = istft(frames, 2048, 2048, kDefaultHop, std::int64_t(w.samples.size()),
                     w.sample_rate);
  REQUIRE(r.samples.size() == w.samples.size());
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double d = double(r.samples[i]) - double(w.samples[i]);
    err += d * d;
    ref += double(w.samples[i]) * double(w.samples[i]);
  }
  CHECK(err / ref < 1e-4);
}

// ------------------------------------------------------------------ pitch units

TEST_CASE("hz/midi conversions") {
  CHECK(hz_to_midi(440.0) == Catch::Approx(69.0).margin(1e-12));
  CHECK(hz_to_midi(880.0) == Catch::Approx(81.0).margin(1e-12));
  CHECK(midi_to_hz(69.0) == Catch::Approx(440.0).margin(1e-9));
  CHECK_THROWS_AS(hz_to_midi(0.0), ValueError);
  CHECK_THROWS_AS(hz_to_midi(-5.0), ValueError);

  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double f = rng.uniform(20.0, 8000.0);
    CHECK(std::abs(midi_to_hz(hz_to_midi(f)) - f) / f < 1e-9);
  }
  CHECK(cents_between(440.0, 880.0) == Catch::Approx(1200.0).margin(1e-9));
  CHECK(cents_between(880.0, 440.0) == Catch::Approx(-1200.0).margin(1e-9));
}

// -------------------------------------------------------------------- loudness

TEST_CASE("loudness of known signals") {
  // Full-scale square wave: RMS 1 -> 0 dB.
  Waveform sq;
  sq.samples.resize(44100);
  for (std::size_t i = 0; i < sq.samples.size(); ++i)
    sq.samples[i] = (i / 50) % 2 == 0 ? 1.0f : -1.0f;
  FrameSeries l = extract_loudness(sq);
  for (float v : l.values) CHECK(std::abs(v) < 0.1);

  // Amplitude-0.5 sine: 20*log10(0.5/sqrt(2)) == -9.03 dB.
  Waveform s = make_sine(220.0, 1.0, 0.5);
  FrameSeries ls = extract_loudness(s);
  for (int t = 3; t < ls.frames() - 3; ++t)
    CHECK(ls.values[std::size_t(t)] == Catch::Approx(-9.0309).margin(0.2));

  // Silence floors at -80 exactly.
  Waveform z;
  z.samples.assign(22050, 0.0f);
  for (float v : extract_loudness(z).values) CHECK(v == kLoudnessFloorDb);
}

TEST_CASE("loudness is monotone in amplitude") {
  Waveform a = make_sine(330.0, 0.6, 0.8);
  Waveform b = a;
  for (auto& s : b.samples) s *= 0.5f;
  FrameSeries la = extract_loudness(a), lb = extract_loudness(b);
  for (int t = 0; t < la.frames(); ++t) {
    const float va = la.values[std::size_t(t)], vb = lb.values[std::size_t(t)];
    if (vb > kLoudnessFloorDb + 0.5f) CHECK(va - vb == Catch::Approx(6.02).margin(0.1));
  }
}

// ------------------------------------------------------------------------- mel

TEST_CASE("mel scale and filterbank shape") {
  CHECK(hz_to_mel(0.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(hz_to_mel(700.0) == Catch::Approx(1127.0 * std::log(2.0)).margin(1e-9));
  CHECK(mel_to_hz(hz_to_mel(1234.5)) == Catch::Approx(1234.5).margin(1e-6));

  MelConfig cfg;
  MelFilterbank fb(cfg, kDefaultSampleRate);
  REQUIRE(fb.n_mels() == 80);
  // Triangles peak at 1 on their own center and vanish on neighbors' centers.
  for (int m = 0; m < fb.n_mels(); ++m) {
    CHECK(fb.weight_at_hz(m, fb.center_hz(m)) == Catch::Approx(1.0).margin(1e-9));
    if (m > 0) CHECK(fb.weight_at_hz(m, fb.center_hz(m - 1)) == Catch::Approx(0.0).margin(1e-9));
  }
  // Centers strictly increasing.
  for (int m = 1; m < fb.n_mels(); ++m) CHECK(fb.center_hz(m) > fb.center_hz(m - 1));
}

TEST_CASE("mel spectrogram of silence and of a tone") {
  MelConfig cfg;
  Waveform z;
  z.samples.assign(44100, 0.0f);
  FeatureMatrix m = mel_spectrogram(z, cfg);
  REQUIRE(m.dims() == 80);
  const float floor_val = float(std::log(kMelPowerFloor));
  for (float v : m.data.data) CHECK(v == Catch::Approx(floor_val).margin(1e-6));

  // 1 kHz sine: constant argmax band, the band whose triangle is tallest at 1 kHz.
  Waveform s = make_sine(1000.0, 0.5, 0.9);
  FeatureMatrix ms = mel_spectrogram(s, cfg);
  MelFilterbank fb(cfg, s.sample_rate);
  int expected = 0;
  for (int b = 1; b < fb.n_mels(); ++b)
    if (fb.weight_at_hz(b, 1000.0) > fb.weight_at_hz(expected, 1000.0)) expected = b;
  for (int t = 5; t < ms.frames() - 5; ++t) {
    int arg = 0;
    for (int j = 1; j < 80; ++j)
      if (ms.data(t, j) > ms.data(t, arg)) arg = j;
    CHECK(std::abs(arg - expected) <= 1);
  }
}

TEST_CASE("mel unapply is energy-consistent on smooth spectra") {
  MelConfig cfg;
  MelFilterbank fb(cfg, kDefaultSampleRate);
  const double bin_hz = double(kDefaultSampleRate) / cfg.n_fft;

  // A smooth broadband power spectrum: pink-ish rolloff plus a gentle bump.
  std::vector<double> power(std::size_t(fb.n_bins()), 0.0);
  for (int b = 0; b < fb.n_bins(); ++b) {
    const double f = b * bin_hz;
    power[std::size_t(b)] = 1.0 / (1.0 + f / 500.0) + 0.3 * std::exp(-std::pow((f - 3000.0) / 2000.0, 2));
  }
  std::vector<double> mel(std::size_t(fb.n_mels()), 0.0);
  std::vector<double> env(std::size_t(fb.n_bins()), 0.0);
  std::vector<double> mel2(std::size_t(fb.n_mels()), 0.0);
  fb.apply(power.data(), mel.data());
  fb.unapply(mel.data(), env.data());
  fb.apply(env.data(), mel2.data());

  // The round trip must reproduce the mel totals, not blow up by the filter
  // widths; interior bands of a smooth spectrum come back within a few percent.
  for (int m = 2; m < fb.n_mels() - 1; ++m) {
    if (mel[std::size_t(m)] <= 0.0) continue;
    CHECK(mel2[std::size_t(m)] / mel[std::size_t(m)] == Catch::Approx(1.0).margin(0.10));
  }
  // And the envelope itself tracks the true per-bin power away from the edges.
  for (int b = 20; b < fb.n_bins() - 40; b += 25)
    CHECK(env[std::size_t(b)] / power[std::size_t(b)] == Catch::Approx(1.0).margin(0.25));
}

TEST_CASE("mel framing is local: concatenation concatenates rows") {
  Waveform a = make_sine(440.0, 100.0 * kDefaultHop / 44100.0, 0.7);
  Waveform b = make_sine(660.0, 80.0 * kDefaultHop / 44100.0, 0.7);
  Waveform cat;
  cat.samples = a.samples;
  cat.samples.insert(cat.samples.end(), b.samples.begin(), b.samples.end());
  MelConfig cfg;
  FeatureMatrix ma = mel_spectrogram(a, cfg);
  FeatureMatrix mc = mel_spectrogram(cat, cfg);
  // Interior frames of the first clip, away from the splice and the edges by
  // more than half a window (1024 samples ~ 5 frames).
  for (int t = 6; t < ma.frames() - 6; ++t)
    for (int j = 0; j < 80; ++j)
      CHECK(mc.data(t, j) == Catch::Approx(ma.data(t, j)).margin(1e-4));
}

// -------------------------------------------------------------------------- f0

TEST_CASE("f0 of a pure tone") {
  for (double freq : {220.0, 440.0}) {
    Waveform w = make_sine(freq, 1.0, 0.8);
    F0Result r = extract_f0(w);
    int voiced = 0;
    std::vector<float> vals;
    for (int t = 0; t < r.f0.frames(); ++t)
      if (r.vuv.values[std::size_t(t)] > 0.0f) {
        ++voiced;
        vals.push_back(r.f0.values[std::size_t(t)]);
      }
    CHECK(voiced >= int(0.95 * r.f0.frames()));
    std::sort(vals.begin(), vals.end());
    const double median = vals[vals.size() / 2];
    CHECK(std::abs(median - freq) < 2.0);
  }
}

TEST_CASE("f0 of noise and silence") {
  Waveform n = make_noise(1.0, 0.8, 17);
  F0Result rn = extract_f0(n);
  int unvoiced = 0;
  for (float v : rn.vuv.values)
    if (v == 0.0f) ++unvoiced;
  CHECK(unvoiced >= int(0.9 * rn.vuv.frames()));

  Waveform z;
  z.samples.assign(44100, 0.0f);
  F0Result rz = extract_f0(z);
  for (int t = 0; t < rz.f0.frames(); ++t) {
    CHECK(rz.vuv.values[std::size_t(t)] == 0.0f);
    CHECK(rz.f0.values[std::size_t(t)] == 0.0f);
  }
}

TEST_CASE("f0 is amplitude invariant over [0.1, 1]") {
  Waveform base = make_sine(311.13, 0.8, 0.9); // E♭4
  F0Result ref = extract_f0(base);
  for (double c : {0.1, 0.5}) {
    Waveform w = base;
    for (auto& s : w.samples) s = float(s * c);
    F0Result r = extract_f0(w);
    for (int t = 0; t < ref.f0.frames(); ++t) {
      CHECK(r.vuv.values[std::size_t(t)] == ref.vuv.values[std::size_t(t)]);
      if (ref.vuv.values[std::size_t(t)] > 0.0f) {
        const double cents = 1200.0 * std::log2(double(r.f0.values[std::size_t(t)]) /
                                                double(ref.f0.values[std::size_t(t)]));
        CHECK(std::abs(cents) < 1.0);
      }
    }
  }
}

TEST_CASE("f0 config validation") {
  PitchConfig bad;
  bad.fmin = 30.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = PitchConfig{};
  bad.fmax = 2000.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = PitchConfig{};
  bad.fmin = 500.0;
  bad.fmax = 400.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

// ------------------------------------------------------------------------- wav

TEST_CASE("wav round trip at 16-bit precision") {
  Waveform w = make_noise(0.1, 0.9, 23);
  const std::string path = "test_dsp_tmp.wav";
  write_wav(path, w);
  Waveform r = read_wav(path);
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate == w.sample_rate);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0f / 32767.0f + 1e-6f);
  std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects malformed input") {
  const std::string path = "test_dsp_bad.wav";
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("this is not a wav file at all, just text", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_wav(path), FormatError);
  std::filesystem::remove(path);
}
