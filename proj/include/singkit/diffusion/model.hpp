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

#include "singkit/diffusion/schedule.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/nn/blocks.hpp"
#include "singkit/nn/params.hpp"
#include "singkit/nn/tape.hpp"
#include "singkit/pitch/model.hpp"
#include "singkit/pitch/singer.hpp"

// DDPM denoiser over log-mel frames: a non-causal dilated-convolution
// residual stack with gated activations, conditioned on [HLF, log-F0, VUV,
// loudness] per frame plus a singer embedding and the diffusion timestep.

namespace singkit::diffusion {

// Fixed channel order of the conditioner matrix. Bump when the layout
// changes; checkpoints record it so a permuted conditioner cannot be fed to
// a model silently.
inline constexpr int kConditionerVersion = 1; // [HLF | logf0 | vuv | loudness_norm]

struct DiffusionConfig {
  int n_mels = 80;
  int hlf_dim = 256;
  int emb_dim = pitch::kDefaultEmbDim;
  int residual_channels = 64;
  int n_blocks = 20; // paper-fixed residual block count
  int kernel = 3;
  int dilation = 1;
  int time_emb_dim = 64;

  void validate() const {
    if (n_mels < 1 || hlf_dim < 1 || emb_dim < 1 || residual_channels < 1 || time_emb_dim < 1)
      throw ConfigError("DiffusionConfig: all widths must be >= 1");
    if (n_blocks != 20)
      throw ConfigError("DiffusionConfig: the denoiser has exactly 20 residual blocks, got " +
                        std::to_string(n_blocks));
    if (kernel < 1 || kernel % 2 == 0)
      throw ConfigError("DiffusionConfig: kernel must be odd and >= 1");
    if (dilation < 1) throw ConfigError("DiffusionConfig: dilation must be >= 1");
  }
};

// ln(f0) on voiced frames, 0 on unvoiced; the conditioner's pitch channel.
inline dsp::FrameSeries make_logf0(const dsp::FrameSeries& f0, const dsp::FrameSeries& vuv) {
  dsp::check_same_frames(f0.frames(), vuv.frames(), "make_logf0");
  dsp::FrameSeries out = f0;
  out.kind = dsp::SeriesKind::logf0;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = vuv.values[i] > 0.0f && f0.values[i] > 0.0f
                        ? float(std::log(double(f0.values[i])))
                        : 0.0f;
  return out;
}

// Per-frame conditioning bundle. The matrix layout is versioned
// (kConditionerVersion): HLF columns first, then log-F0, VUV, and loudness
// normalized to [0, 1] so every channel is unit-scale.
struct Conditioner {
  dsp::FeatureMatrix hlf;
  dsp::FrameSeries logf0;    // ln(f0) voiced, 0 unvoiced
  dsp::FrameSeries vuv;      // {0, 1}
  dsp::FrameSeries loudness; // dB
  pitch::SingerEmbedding singer;

  int frames() const { return hlf.frames(); }

  void validate(const DiffusionConfig& cfg) const {
    dsp::check_same_frames(hlf.frames(), logf0.frames(), "Conditioner: hlf vs logf0");
    dsp::check_same_frames(hlf.frames(), vuv.frames(), "Conditioner: hlf vs vuv");
    dsp::check_same_frames(hlf.frames(), loudness.frames(), "Conditioner: hlf vs loudness");
    if (hlf.dims() != cfg.hlf_dim)
      throw ShapeError("Conditioner: hlf has " + std::to_string(hlf.dims()) +
                       " dims, config says " + std::to_string(cfg.hlf_dim));
    singer.validate();
    if (singer.dim() != cfg.emb_dim)
      throw ShapeError("Conditioner: singer dim " + std::to_string(singer.dim()) +
                       ", config says " + std::to_string(cfg.emb_dim));
  }

  Mat<float> matrix() const {
    const int T = frames();
    Mat<float> m(T, hlf.dims() + 3);
    for (int t = 0; t < T; ++t) {
      float* row = m.row_ptr(t);
      const float* h = hlf.data.row_ptr(t);
      for (int j = 0; j < hlf.dims(); ++j) row[j] = h[j];
      row[hlf.dims() + 0] = logf0.values[std::size_t(t)];
      row[hlf.dims() + 1] = vuv.values[std::size_t(t)];
      row[hlf.dims() + 2] = float(pitch::loudness_to_norm(double(loudness.values[std::size_t(t)])));
    }
    return m;
  }
};

// Full differentiable graph of the noise estimator. x_t is the standardized
// noisy mel (T×n_mels), cond the conditioner matrix (T×(hlf_dim+3)).
// Returns eps_hat, T×n_mels.
template <class Real>
nn::Var denoiser_graph(nn::Tape<Real>& t, nn::Binder<Real>& P, const DiffusionConfig& cfg,
                       const Mat<Real>& x_t, int step, const Mat<Real>& cond,
                       const std::vector<float>& singer) {
  cfg.validate();
  if (x_t.cols != cfg.n_mels)
    throw ShapeError("denoiser: x_t has " + std::to_string(x_t.cols) + " mel dims, config says " +
                     std::to_string(cfg.n_mels));
  if (cond.rows != x_t.rows || cond.cols != cfg.hlf_dim + 3)
    throw ShapeError("denoiser: conditioner is " + cond.shape_str() + ", expected " +
                     Mat<Real>::shape_str(x_t.rows, cfg.hlf_dim + 3));
  if (int(singer.size()) != cfg.emb_dim)
    throw ShapeError("denoiser: singer embedding dim " + std::to_string(singer.size()) +
                     ", config says " + std::to_string(cfg.emb_dim));
  const int C = cfg.residual_channels;

  // Joint input projection over [noisy mel | conditioner].
  nn::Var h = t.concat_cols({t.constant(x_t), t.constant(cond)});
  h = t.relu(nn::linear(t, P, "in_proj", h, C));

  // Timestep embedding through a small MLP, plus the singer projection; the
  // sum is injected at every residual block output.
  nn::Var te = t.constant(nn::timestep_embedding<Real>(step, cfg.time_emb_dim));
  te = t.relu(nn::linear(t, P, "time.fc1", te, cfg.time_emb_dim));
  te = nn::linear(t, P, "time.fc2", te, C);
  Mat<Real> emb(1, cfg.emb_dim);
  for (int i = 0; i < cfg.emb_dim; ++i) emb(0, i) = Real(singer[std::size_t(i)]);
  nn::Var inject = t.add(te, nn::linear(t, P, "singer_proj", t.constant(std::move(emb)), C));

  std::vector<nn::Var> skips;
  skips.reserve(std::size_t(cfg.n_blocks));
  for (int b = 0; b < cfg.n_blocks; ++b) {
    const std::string name = "blk" + std::to_string(b);
    nn::Var w = P(name + ".conv.w", cfg.kernel * C, 2 * C);
    nn::Var bias = P(name + ".conv.b", 1, 2 * C, nn::Init::zeros);
    nn::Var g = t.conv1d(h, w, bias, cfg.kernel, cfg.dilation);
    nn::Var gate = t.mul(t.tanh_op(t.slice_cols(g, 0, C)), t.sigmoid_op(t.slice_cols(g, C, 2 * C)));
    nn::Var res = nn::linear(t, P, name + ".res", gate, C);
    skips.push_back(nn::linear(t, P, name + ".skip", gate, C));
    h = t.scale(t.add(h, res), 1.0 / std::sqrt(2.0));
    h = t.add_row(h, inject);
  }

  nn::Var s = skips[0];
  for (int b = 1; b < cfg.n_blocks; ++b) s = t.add(s, skips[std::size_t(b)]);
  s = t.relu(s);
  s = t.relu(nn::linear(t, P, "out.fc1", s, C));
  // Zero-init final projection: the denoiser starts as the zero function
  // (loss exactly at the eps variance), so early optimization learns to grow
  // the skip path instead of shrinking it to kill the initial output noise.
  nn::Var w_out = P("out.fc2.w", C, cfg.n_mels, nn::Init::zeros);
  nn::Var b_out = P("out.fc2.b", 1, cfg.n_mels, nn::Init::zeros);
  return t.add_row(t.matmul(s, w_out), b_out);
}

inline Mat<float> denoiser_forward(const Mat<float>& x_t, int step, const Mat<float>& cond,
                                   const std::vector<float>& singer, nn::ParamSet<float>& params,
                                   const DiffusionConfig& cfg) {
  nn::Tape<float> tape;
  tape.grad_enabled = false;
  nn::Binder<float> binder(tape, params);
  const nn::Var y = denoiser_graph(tape, binder, cfg, x_t, step, cond, singer);
  return tape.val(y);
}

// ------------------------------------------------ mel standardization buffers

inline constexpr const char* kMelMeanBuffer = "mel_mean";
inline constexpr const char* kMelStdBuffer = "mel_std";
inline constexpr float kMelStdFloor = 1e-6f;

// Per-dimension corpus statistics; population std, floored so constant mel
// dimensions stay finite.
inline void set_mel_stats(nn::ParamSet<float>& params, const std::vector<const Mat<float>*>& mels,
                          int n_mels) {
  Mat<float> mean(1, n_mels), stdev(1, n_mels);
  std::int64_t frames = 0;
  std::vector<double> sum(std::size_t(n_mels), 0.0), sq(std::size_t(n_mels), 0.0);
  for (const Mat<float>* m : mels) {
    if (m->cols != n_mels)
      throw ShapeError("set_mel_stats: mel has " + std::to_string(m->cols) + " dims, expected " +
                       std::to_string(n_mels));
    frames += m->rows;
    for (int t = 0; t < m->rows; ++t) {
      const float* row = m->row_ptr(t);
      for (int d = 0; d < n_mels; ++d) {
        sum[std::size_t(d)] += double(row[d]);
        sq[std::size_t(d)] += double(row[d]) * double(row[d]);
      }
    }
  }
  if (frames == 0) throw ValueError("set_mel_stats: no frames");
  for (int d = 0; d < n_mels; ++d) {
    const double mu = sum[std::size_t(d)] / double(frames);
    const double var = sq[std::size_t(d)] / double(frames) - mu * mu;
    mean(0, d) = float(mu);
    stdev(0, d) = std::max(float(std::sqrt(std::max(var, 0.0))), kMelStdFloor);
  }
  params.buffers[kMelMeanBuffer] = std::move(mean);
  params.buffers[kMelStdBuffer] = std::move(stdev);
  params.metadata["conditioner_version"] = std::to_string(kConditionerVersion);
}

inline void require_mel_stats(const nn::ParamSet<float>& params, int n_mels) {
  const auto mi = params.buffers.find(kMelMeanBuffer);
  const auto si = params.buffers.find(kMelStdBuffer);
  if (mi == params.buffers.end() || si == params.buffers.end())
    throw ValueError("diffusion checkpoint is missing mel mean/std buffers");
  if (mi->second.cols != n_mels || si->second.cols != n_mels)
    throw ShapeError("mel stats buffers have " + std::to_string(mi->second.cols) +
                     " dims, expected " + std::to_string(n_mels));
}

inline Mat<float> standardize_mel(const Mat<float>& mel, const nn::ParamSet<float>& params) {
  require_mel_stats(params, mel.cols);
  const Mat<float>& mu = params.buffers.at(kMelMeanBuffer);
  const Mat<float>& sd = params.buffers.at(kMelStdBuffer);
  Mat<float> out(mel.rows, mel.cols);
  for (int t = 0; t < mel.rows; ++t)
    for (int d = 0; d < mel.cols; ++d) out(t, d) = (mel(t, d) - mu(0, d)) / sd(0, d);
  return out;
}

inline Mat<float> destandardize_mel(const Mat<float>& x, const nn::ParamSet<float>& params) {
  require_mel_stats(params, x.cols);
  const Mat<float>& mu = params.buffers.at(kMelMeanBuffer);
  const Mat<float>& sd = params.buffers.at(kMelStdBuffer);
  Mat<float> out(x.rows, x.cols);
  for (int t = 0; t < x.rows; ++t)
    for (int d = 0; d < x.cols; ++d) out(t, d) = x(t, d) * sd(0, d) + mu(0, d);
  return out;
}

// ------------------------------------------------------------------- sampling

// Reverse diffusion from seeded Gaussian noise. `steps` in [1, N] selects an
// evenly spaced subsequence of the schedule (0 = full N); the full-length
// path applies the textbook posterior step exactly. Output is denormalized
// log-mel on the conditioner's frame clock.
inline dsp::FeatureMatrix sample(const Conditioner& cond, nn::ParamSet<float>& params,
                                 const DiffusionConfig& cfg, const DiffusionSchedule& sched,
                                 std::uint64_t seed, int steps = 0) {
  cfg.validate();
  sched.validate();
  cond.validate(cfg);
  require_mel_stats(params, cfg.n_mels);
  const int N = sched.n_steps;
  if (steps == 0) steps = N;
  if (steps < 1 || steps > N)
    throw ConfigError("sample: steps must be in [1, " + std::to_string(N) + "], got " +
                      std::to_string(steps));

  const int T = cond.frames();
  const Mat<float> cmat = cond.matrix();
  Rng rng(mix_seed(seed, 0x6469666675736521ull, 0));
  Mat<float> x(T, cfg.n_mels);
  for (auto& v : x.data) v = float(rng.gaussian());

  // Retained timesteps, descending. steps == N keeps every t.
  std::vector<int> taus(std::size_t(steps), 0);
  for (int s = 0; s < steps; ++s)
    taus[std::size_t(s)] =
        steps == 1 ? N : 1 + int(std::lround(double(s) * double(N - 1) / double(steps - 1)));
  Mat<float> z(T, cfg.n_mels);
  for (int s = steps - 1; s >= 0; --s) {
    const int t_cur = taus[std::size_t(s)];
    const Mat<float> eps_hat = denoiser_forward(x, t_cur, cmat, cond.singer.v, params, cfg);
    const bool last = s == 0;
    if (!last)
      for (auto& v : z.data) v = float(rng.gaussian());
    if (steps == N) {
      x = denoise_step_from_eps(x, t_cur, eps_hat, sched, last ? nullptr : &z);
    } else {
      const double abar_prev = last ? 1.0 : sched.abar(taus[std::size_t(s - 1)]);
      x = denoise_step_strided(x, sched.abar(t_cur), abar_prev, eps_hat, last ? nullptr : &z);
    }
    if (!x.all_finite())
      throw DivergedError("sampling diverged at step " + std::to_string(t_cur));
  }

  dsp::FeatureMatrix out;
  out.hop = cond.hlf.hop;
  out.sample_rate = cond.hlf.sample_rate;
  out.data = destandardize_mel(x, params);
  return out;
}

// ------------------------------------------------------------------- training

struct DiffusionItem {
  dsp::FeatureMatrix mel; // raw log-mel, T×n_mels
  Conditioner cond;
};

inline void validate_diffusion_dataset(const std::vector<DiffusionItem>& data,
                                       const DiffusionConfig& cfg) {
  if (data.empty()) throw ValueError("train_synth: empty dataset");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string what = "train_synth: item " + std::to_string(i);
    data[i].cond.validate(cfg);
    dsp::check_same_frames(data[i].mel.frames(), data[i].cond.frames(), what + " mel vs cond");
    if (data[i].mel.dims() != cfg.n_mels)
      throw ShapeError(what + ": mel dims " + std::to_string(data[i].mel.dims()));
    if (!data[i].mel.data.all_finite()) throw ValueError(what + ": non-finite mel");
  }
}

// eps-prediction MSE at a uniformly sampled timestep, one item per step,
// round-robin. crop_frames > 0 trains on random crops of that length.
inline std::vector<double> train_synth(const std::vector<DiffusionItem>& data,
                                       const DiffusionConfig& cfg, const DiffusionSchedule& sched,
                                       const nn::TrainConfig& tcfg, nn::ParamSet<float>& params,
                                       int crop_frames = 0) {
  cfg.validate();
  sched.validate();
  tcfg.validate();
  validate_diffusion_dataset(data, cfg);
  if (crop_frames < 0) throw ConfigError("train_synth: crop_frames must be >= 0");

  std::vector<const Mat<float>*> mels;
  mels.reserve(data.size());
  for (const DiffusionItem& item : data) mels.push_back(&item.mel.data);
  set_mel_stats(params, mels, cfg.n_mels);

  Rng rng(mix_seed(tcfg.seed, 0x747261696e5f7378ull, 0));
  std::vector<double> losses;
  losses.reserve(std::size_t(tcfg.steps));
  for (int step = 0; step < tcfg.steps; ++step) {
    const DiffusionItem& item = data[std::size_t(step) % data.size()];
    Mat<float> x0 = standardize_mel(item.mel.data, params);
    Mat<float> cmat = item.cond.matrix();

    if (crop_frames > 0 && x0.rows > crop_frames) {
      const int start = int(rng.uniform_int(0, std::int64_t(x0.rows - crop_frames)));
      x0 = x0.slice_rows(start, start + crop_frames);
      cmat = cmat.slice_rows(start, start + crop_frames);
    }
    const int t_step = int(rng.uniform_int(1, std::int64_t(sched.n_steps)));
    Mat<float> eps(x0.rows, x0.cols);
    for (auto& v : eps.data) v = float(rng.gaussian());
    const Mat<float> x_t = forward_diffuse(x0, t_step, eps, sched);

    const double loss = nn::forward_backward(
        [&](nn::Tape<float>& t, nn::Binder<float>& P) {
          const nn::Var pred = denoiser_graph(t, P, cfg, x_t, t_step, cmat, item.cond.singer.v);
          return t.mse(pred, t.constant(eps));
        },
        params);
    nn::clip_global_norm(params, tcfg.clip_norm);
    nn::adam_step(params, tcfg.lr);
    losses.push_back(loss);
  }
  return losses;
}

} // namespace singkit::diffusion
