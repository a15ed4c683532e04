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
#include <map>
#include <string>
#include <vector>

#include "singkit/core/rng.hpp"
#include "singkit/inpaint/plan.hpp"
#include "singkit/inpaint/replace.hpp"
#include "singkit/inpaint/splice.hpp"

using namespace singkit;
using inpaint::EditPlan;
using inpaint::Segment;
using inpaint::Source;
using inpaint::SpliceConfig;
using inpaint::StreamBundle;

namespace {

Segment seg(int start, int end, Source src, std::string id = "") {
  Segment s;
  s.start = start;
  s.end = end;
  s.source = src;
  s.replacement_id = std::move(id);
  return s;
}

EditPlan plan_of(std::vector<Segment> segs) {
  EditPlan p;
  p.segments = std::move(segs);
  return p;
}

// Deterministic bundle with mixed voiced/unvoiced frames.
StreamBundle make_bundle(int T, int D, std::uint64_t seed,
                         linguistic::HlfProvider provider = linguistic::HlfProvider::pseudo) {
  StreamBundle b;
  b.hlf.features.data = mat_random_gaussian<float>(T, D, seed);
  b.hlf.provider = provider;
  for (dsp::FrameSeries* s : {&b.logf0, &b.vuv, &b.loudness}) {
    s->values.resize(std::size_t(T));
  }
  b.logf0.kind = dsp::SeriesKind::logf0;
  b.vuv.kind = dsp::SeriesKind::vuv;
  b.loudness.kind = dsp::SeriesKind::loudness_db;
  for (int t = 0; t < T; ++t) {
    const bool voiced = (t + int(seed % 4)) % 5 != 0;
    b.vuv.values[std::size_t(t)] = voiced ? 1.0f : 0.0f;
    b.logf0.values[std::size_t(t)] =
        voiced ? float(5.3 + 0.1 * std::sin(0.4 * t + double(seed % 7))) : 0.0f;
    b.loudness.values[std::size_t(t)] =
        voiced ? float(-28.0 + 5.0 * std::cos(0.2 * t)) : dsp::kLoudnessFloorDb;
  }
  return b;
}

// Constant-valued, fully voiced bundle for crossfade hand checks.
StreamBundle const_bundle(int T, int D, float hlf, float logf0, float loud) {
  StreamBundle b;
  b.hlf.features.data = Mat<float>(T, D);
  b.hlf.features.data.fill(hlf);
  b.logf0.kind = dsp::SeriesKind::logf0;
  b.vuv.kind = dsp::SeriesKind::vuv;
  b.loudness.kind = dsp::SeriesKind::loudness_db;
  b.logf0.values.assign(std::size_t(T), logf0);
  b.vuv.values.assign(std::size_t(T), 1.0f);
  b.loudness.values.assign(std::size_t(T), loud);
  return b;
}

bool series_equal(const dsp::FrameSeries& a, const dsp::FrameSeries& b) {
  return a.values == b.values;
}

bool bundles_equal(const StreamBundle& a, const StreamBundle& b) {
  return a.hlf.features.data.data == b.hlf.features.data.data && series_equal(a.logf0, b.logf0) &&
         series_equal(a.vuv, b.vuv) && series_equal(a.loudness, b.loudness);
}

} // namespace

TEST_CASE("validate_plan accepts and normalizes well-formed plans") {
  // Single full-range KEEP.
  const EditPlan whole = inpaint::validate_plan(plan_of({seg(0, 10, Source::keep)}), 10);
  REQUIRE(whole.segments.size() == 1);

  // Adjacent KEEP segments merge into one.
  const EditPlan merged = inpaint::validate_plan(
      plan_of({seg(0, 5, Source::keep), seg(5, 10, Source::keep)}), 10);
  REQUIRE(merged.segments.size() == 1);
  REQUIRE(merged.segments[0].start == 0);
  REQUIRE(merged.segments[0].end == 10);
  REQUIRE(merged.segments[0].source == Source::keep);

  // KEEP ids are cleared during normalization.
  EditPlan tagged = plan_of({seg(0, 10, Source::keep, "stray")});
  REQUIRE(inpaint::validate_plan(tagged, 10).segments[0].replacement_id.empty());

  // REPLACE segments never merge: each one pins its own bundle length.
  const EditPlan repl = inpaint::validate_plan(
      plan_of({seg(0, 5, Source::replace, "a"), seg(5, 10, Source::replace, "a")}), 10);
  REQUIRE(repl.segments.size() == 2);

  // Mixed plan keeps REPLACE boundaries while merging the KEEP run.
  const EditPlan mixed = inpaint::validate_plan(
      plan_of({seg(0, 3, Source::keep), seg(3, 6, Source::keep), seg(6, 9, Source::replace, "x"),
               seg(9, 12, Source::keep)}),
      12);
  REQUIRE(mixed.segments.size() == 3);
  REQUIRE(mixed.segments[0].end == 6);
  REQUIRE(mixed.segments[1].replacement_id == "x");
}

TEST_CASE("validate_plan names the first bad boundary") {
  // Gap between segments.
  REQUIRE_THROWS_WITH(
      inpaint::validate_plan(plan_of({seg(0, 5, Source::keep), seg(6, 10, Source::keep)}), 10),
      Catch::Matchers::ContainsSubstring("gap at frame 5"));
  // Overlap.
  REQUIRE_THROWS_WITH(
      inpaint::validate_plan(plan_of({seg(0, 6, Source::keep), seg(5, 10, Source::keep)}), 10),
      Catch::Matchers::ContainsSubstring("overlap at frame 5"));
  // Runs past the end.
  REQUIRE_THROWS_WITH(inpaint::validate_plan(plan_of({seg(0, 12, Source::keep)}), 10),
                      Catch::Matchers::ContainsSubstring("runs past T = 10"));
  // Stops short of the end.
  REQUIRE_THROWS_WITH(inpaint::validate_plan(plan_of({seg(0, 8, Source::keep)}), 10),
                      Catch::Matchers::ContainsSubstring("gap at frame 8"));
  // Does not start at frame zero.
  REQUIRE_THROWS_WITH(inpaint::validate_plan(plan_of({seg(3, 10, Source::keep)}), 10),
                      Catch::Matchers::ContainsSubstring("gap at frame 0"));
  // Empty segment.
  REQUIRE_THROWS_AS(inpaint::validate_plan(plan_of({seg(5, 5, Source::keep)}), 10), ValueError);
  // REPLACE without an id.
  REQUIRE_THROWS_WITH(inpaint::validate_plan(plan_of({seg(0, 10, Source::replace)}), 10),
                      Catch::Matchers::ContainsSubstring("replacement_id"));
  // Degenerate inputs.
  REQUIRE_THROWS_AS(inpaint::validate_plan(EditPlan{}, 10), ValueError);
  REQUIRE_THROWS_AS(inpaint::validate_plan(plan_of({seg(0, 1, Source::keep)}), 0), ValueError);
}

TEST_CASE("edit plan TSV round trip") {
  const EditPlan plan = plan_of(
      {seg(0, 40, Source::keep), seg(40, 90, Source::replace, "verse2"), seg(90, 120, Source::keep)});
  const std::string tsv = inpaint::format_plan_tsv(plan);
  const EditPlan back = inpaint::parse_plan_tsv(tsv);
  REQUIRE(back.segments.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(back.segments[i].start == plan.segments[i].start);
    REQUIRE(back.segments[i].end == plan.segments[i].end);
    REQUIRE(back.segments[i].source == plan.segments[i].source);
    REQUIRE(back.segments[i].replacement_id == plan.segments[i].replacement_id);
  }

  // Comments, blank lines, and CRLF endings are tolerated.
  const EditPlan commented =
      inpaint::parse_plan_tsv("# edit script\n\n0\t40\tKEEP\t-\r\n40\t120\tREPLACE\tbridge\n");
  REQUIRE(commented.segments.size() == 2);
  REQUIRE(commented.segments[0].replacement_id.empty());
  REQUIRE(commented.segments[1].replacement_id == "bridge");

  REQUIRE_THROWS_AS(inpaint::parse_plan_tsv("0\t40\tKEEP\n"), ParseError);          // 3 columns
  REQUIRE_THROWS_AS(inpaint::parse_plan_tsv("0\t40\tDROP\t-\n"), ParseError);       // bad source
  REQUIRE_THROWS_AS(inpaint::parse_plan_tsv("0\tforty\tKEEP\t-\n"), ParseError);    // bad number
  REQUIRE_THROWS_AS(inpaint::parse_plan_tsv("0\t40x\tKEEP\t-\n"), ParseError);      // trailing junk
}

TEST_CASE("splice with an all-KEEP plan is bit-identical to the original") {
  const StreamBundle orig = make_bundle(30, 4, 11, linguistic::HlfProvider::file);
  const StreamBundle out = inpaint::splice_streams(
      orig, {}, plan_of({seg(0, 12, Source::keep), seg(12, 30, Source::keep)}));
  REQUIRE(bundles_equal(out, orig));
  REQUIRE(out.hlf.provider == linguistic::HlfProvider::file); // provenance untouched
}

TEST_CASE("splice with an all-REPLACE plan is bit-identical to the bundle") {
  const StreamBundle orig = make_bundle(24, 4, 12);
  const StreamBundle fresh = make_bundle(24, 4, 99, linguistic::HlfProvider::predicted);
  std::map<std::string, StreamBundle> repl;
  repl["all"] = fresh;
  const StreamBundle out =
      inpaint::splice_streams(orig, repl, plan_of({seg(0, 24, Source::replace, "all")}));
  REQUIRE(bundles_equal(out, fresh));
  REQUIRE(out.hlf.provider == linguistic::HlfProvider::predicted);
}

TEST_CASE("splice matches a per-frame selector oracle on a random plan") {
  const int T = 97;
  const int D = 5;
  const StreamBundle orig = make_bundle(T, D, 21);

  // Random tiling of [0, T) into 1..8 frame segments, each REPLACE segment
  // backed by its own exactly-sized bundle.
  Rng rng(2026);
  EditPlan plan;
  std::map<std::string, StreamBundle> repl;
  int cursor = 0;
  int n_repl = 0;
  while (cursor < T) {
    const int len = std::min(T - cursor, 1 + int(rng.uniform() * 7.0));
    if (rng.uniform() < 0.5) {
      plan.segments.push_back(seg(cursor, cursor + len, Source::keep));
    } else {
      const std::string id = "r" + std::to_string(n_repl++);
      plan.segments.push_back(seg(cursor, cursor + len, Source::replace, id));
      repl[id] = make_bundle(len, D, 500 + std::uint64_t(n_repl));
    }
    cursor += len;
  }
  REQUIRE(n_repl >= 1); // seed chosen so the plan actually replaces something

  const StreamBundle out = inpaint::splice_streams(orig, repl, plan);
  REQUIRE(out.frames() == T);

  // Oracle: resolve every frame independently against the raw plan.
  for (int t = 0; t < T; ++t) {
    const Segment* owner = nullptr;
    for (const Segment& s : plan.segments)
      if (s.start <= t && t < s.end) owner = &s;
    REQUIRE(owner != nullptr);
    const StreamBundle& src = owner->source == Source::keep ? orig : repl.at(owner->replacement_id);
    const int f = owner->source == Source::keep ? t : t - owner->start;
    for (int d = 0; d < D; ++d)
      REQUIRE(out.hlf.features.data(t, d) == src.hlf.features.data(f, d));
    REQUIRE(out.logf0.values[std::size_t(t)] == src.logf0.values[std::size_t(f)]);
    REQUIRE(out.vuv.values[std::size_t(t)] == src.vuv.values[std::size_t(f)]);
    REQUIRE(out.loudness.values[std::size_t(t)] == src.loudness.values[std::size_t(f)]);
  }
}

TEST_CASE("splice is idempotent") {
  const StreamBundle orig = make_bundle(40, 3, 31);
  std::map<std::string, StreamBundle> repl;
  repl["mid"] = make_bundle(14, 3, 32);
  const EditPlan plan = plan_of(
      {seg(0, 13, Source::keep), seg(13, 27, Source::replace, "mid"), seg(27, 40, Source::keep)});

  const StreamBundle once = inpaint::splice_streams(orig, repl, plan);
  const StreamBundle twice = inpaint::splice_streams(once, repl, plan);
  REQUIRE(bundles_equal(once, twice));
  REQUIRE(twice.hlf.provider == once.hlf.provider);
}

TEST_CASE("splice rejects bad replacements") {
  const StreamBundle orig = make_bundle(20, 3, 41);
  std::map<std::string, StreamBundle> repl;
  repl["short"] = make_bundle(5, 3, 42);
  const EditPlan plan = plan_of(
      {seg(0, 10, Source::keep), seg(10, 16, Source::replace, "short"), seg(16, 20, Source::keep)});

  // Length mismatch names the segment and both lengths.
  REQUIRE_THROWS_WITH(inpaint::splice_streams(orig, repl, plan),
                      Catch::Matchers::ContainsSubstring("[10, 16)") &&
                          Catch::Matchers::ContainsSubstring("needs 6") &&
                          Catch::Matchers::ContainsSubstring("has 5"));

  // Unknown id.
  std::map<std::string, StreamBundle> empty;
  REQUIRE_THROWS_WITH(inpaint::splice_streams(orig, empty, plan),
                      Catch::Matchers::ContainsSubstring("short"));

  // HLF width mismatch.
  repl["short"] = make_bundle(6, 4, 43);
  REQUIRE_THROWS_AS(inpaint::splice_streams(orig, repl, plan), ShapeError);

  // Frame clock mismatch.
  repl["short"] = make_bundle(6, 3, 44);
  repl["short"].hlf.features.hop = 256;
  REQUIRE_THROWS_AS(inpaint::splice_streams(orig, repl, plan), ConfigError);

  // Misaligned bundle internals.
  repl["short"] = make_bundle(6, 3, 45);
  repl["short"].vuv.values.pop_back();
  REQUIRE_THROWS_AS(inpaint::splice_streams(orig, repl, plan), ShapeError);
}

TEST_CASE("optional crossfade blends log-F0 and loudness next to kept content") {
  const int T = 40;
  const StreamBundle orig = const_bundle(T, 2, 0.0f, 1.0f, -20.0f);
  std::map<std::string, StreamBundle> repl;
  repl["mid"] = const_bundle(20, 2, 9.0f, 2.0f, -10.0f);
  const EditPlan plan = plan_of(
      {seg(0, 10, Source::keep), seg(10, 30, Source::replace, "mid"), seg(30, 40, Source::keep)});

  SpliceConfig fade;
  fade.crossfade = true;
  const StreamBundle out = inpaint::splice_streams(orig, repl, plan, fade);

  for (int f = 0; f < 20; ++f) {
    const int t = 10 + f;
    const double wl = double(f + 1) / 6.0;
    const double wr = double(20 - f) / 6.0;
    const double w = std::min(1.0, std::min(wl, wr));
    REQUIRE(out.logf0.values[std::size_t(t)] == Catch::Approx(1.0 + w).margin(1e-6));
    REQUIRE(out.loudness.values[std::size_t(t)] == Catch::Approx(-20.0 + 10.0 * w).margin(1e-6));
    // HLF and VUV stay hard cuts regardless of the flag.
    REQUIRE(out.hlf.features.data(t, 0) == 9.0f);
    REQUIRE(out.vuv.values[std::size_t(t)] == 1.0f);
  }
  // KEEP frames are untouched even with the fade on.
  REQUIRE(out.logf0.values[9] == 1.0f);
  REQUIRE(out.logf0.values[30] == 1.0f);

  // log-F0 does not blend against an unvoiced original frame.
  StreamBundle gap = orig;
  gap.vuv.values[11] = 0.0f;
  gap.logf0.values[11] = 0.0f;
  const StreamBundle out2 = inpaint::splice_streams(gap, repl, plan, fade);
  REQUIRE(out2.logf0.values[11] == 2.0f); // hard copy of the replacement
  REQUIRE(out2.loudness.values[11] ==
          Catch::Approx(-20.0 + 10.0 * (2.0 / 6.0)).margin(1e-6)); // loudness still fades

  // Default config leaves everything as hard cuts.
  const StreamBundle hard = inpaint::splice_streams(orig, repl, plan);
  REQUIRE(hard.logf0.values[10] == 2.0f);
  REQUIRE(hard.loudness.values[29] == -10.0f);
}

TEST_CASE("crossfade ramps only meet KEEP neighbours") {
  const int T = 20;
  const StreamBundle orig = const_bundle(T, 1, 0.0f, 1.0f, -20.0f);
  std::map<std::string, StreamBundle> repl;
  repl["a"] = const_bundle(5, 1, 0.0f, 2.0f, -10.0f);
  repl["b"] = const_bundle(5, 1, 0.0f, 3.0f, -5.0f);
  const EditPlan plan =
      plan_of({seg(0, 5, Source::keep), seg(5, 10, Source::replace, "a"),
               seg(10, 15, Source::replace, "b"), seg(15, 20, Source::keep)});

  SpliceConfig fade;
  fade.crossfade = true;
  const StreamBundle out = inpaint::splice_streams(orig, repl, plan, fade);

  // Segment a fades on its left only; its last frame keeps the pure left ramp.
  for (int f = 0; f < 5; ++f) {
    const double w = std::min(1.0, double(f + 1) / 6.0);
    REQUIRE(out.logf0.values[std::size_t(5 + f)] == Catch::Approx(1.0 + w).margin(1e-6));
  }
  // Segment b fades on its right only.
  for (int f = 0; f < 5; ++f) {
    const double w = std::min(1.0, double(5 - f) / 6.0);
    REQUIRE(out.logf0.values[std::size_t(10 + f)] ==
            Catch::Approx(w * 3.0 + (1.0 - w) * 1.0).margin(1e-6));
  }
}

namespace {

linguistic::LinguisticConfig toy_ling_config(int vocab) {
  linguistic::LinguisticConfig cfg;
  cfg.vocab_size = vocab;
  cfg.hlf_dim = 6;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.d_ff = 8;
  cfg.n_enc_blocks = 1;
  cfg.n_dec_blocks = 1;
  return cfg;
}

pitch::PitchConfig toy_pitch_config() {
  pitch::PitchConfig cfg;
  cfg.hlf_dim = 6;
  cfg.emb_dim = 4;
  cfg.note_emb_dim = 4;
  cfg.d_model = 8;
  cfg.d_prenet = 6;
  cfg.d_hidden = 8;
  cfg.conv_kernel = 3;
  cfg.n_conv_layers = 1;
  return cfg;
}

// Rest / two notes / rest over 120 frames.
midi::MidiStream segment_midi() {
  midi::MidiStream m;
  m.source_tag = midi::SourceTag::flattened;
  m.notes.assign(10, 0.0);
  m.notes.insert(m.notes.end(), 50, 55.0);
  m.notes.insert(m.notes.end(), 50, 62.25);
  m.notes.insert(m.notes.end(), 10, 0.0);
  return m;
}

pitch::SingerEmbedding toy_singer(int dim, std::uint64_t seed) {
  Rng rng(seed);
  pitch::SingerEmbedding e;
  e.v.resize(std::size_t(dim));
  double sq = 0.0;
  for (auto& x : e.v) {
    x = float(rng.gaussian());
    sq += double(x) * double(x);
  }
  for (auto& x : e.v) x = float(double(x) / std::sqrt(sq));
  return e;
}

} // namespace

TEST_CASE("build_replacement produces an aligned, deterministic bundle") {
  const linguistic::LinguisticConfig ling_cfg = toy_ling_config(7);
  const pitch::PitchConfig pitch_cfg = toy_pitch_config();
  nn::ParamSet<float> ling_ps(61);
  nn::ParamSet<float> pitch_ps(62);
  const pitch::SingerEmbedding singer = toy_singer(pitch_cfg.emb_dim, 63);

  linguistic::ScoreLabel label;
  label.phonemes = {1, 2, 3, 4, 5, 6};
  label.durations = {20, 20, 20, 20, 20, 20}; // sums to 120
  const midi::MidiStream midi = segment_midi();

  const StreamBundle b = inpaint::build_replacement(label, midi, singer, ling_ps, ling_cfg,
                                                    pitch_ps, pitch_cfg);
  REQUIRE(b.frames() == 120);
  REQUIRE(b.hlf.dims() == ling_cfg.hlf_dim);
  REQUIRE(b.logf0.frames() == 120);
  REQUIRE(b.vuv.frames() == 120);
  REQUIRE(b.loudness.frames() == 120);
  REQUIRE(b.hlf.provider == linguistic::HlfProvider::predicted);

  // log-F0 composes the predicted residual onto the MIDI: positive exactly on
  // frames that are both voiced and carry a note.
  for (int t = 0; t < 120; ++t) {
    const bool voiced = b.vuv.values[std::size_t(t)] > 0.5f;
    const bool noted = midi.notes[std::size_t(t)] != 0.0;
    REQUIRE((b.vuv.values[std::size_t(t)] == 0.0f || b.vuv.values[std::size_t(t)] == 1.0f));
    if (voiced && noted) {
      REQUIRE(b.logf0.values[std::size_t(t)] > 0.0f);
    } else {
      REQUIRE(b.logf0.values[std::size_t(t)] == 0.0f);
    }
    REQUIRE(std::isfinite(b.loudness.values[std::size_t(t)]));
  }

  // Same inputs, same checkpoints -> identical bundles.
  const StreamBundle b2 = inpaint::build_replacement(label, midi, singer, ling_ps, ling_cfg,
                                                     pitch_ps, pitch_cfg);
  REQUIRE(bundles_equal(b, b2));
}

TEST_CASE("build_replacement rejects duration/MIDI misalignment") {
  const linguistic::LinguisticConfig ling_cfg = toy_ling_config(7);
  const pitch::PitchConfig pitch_cfg = toy_pitch_config();
  nn::ParamSet<float> ling_ps(71);
  nn::ParamSet<float> pitch_ps(72);
  const pitch::SingerEmbedding singer = toy_singer(pitch_cfg.emb_dim, 73);

  linguistic::ScoreLabel label;
  label.phonemes = {1, 2, 3};
  label.durations = {40, 40, 39}; // 119, one short
  REQUIRE_THROWS_WITH(inpaint::build_replacement(label, segment_midi(), singer, ling_ps, ling_cfg,
                                                 pitch_ps, pitch_cfg),
                      Catch::Matchers::ContainsSubstring("119") &&
                          Catch::Matchers::ContainsSubstring("120"));
}

TEST_CASE("build_replacement with a second-language vocabulary differs") {
  const pitch::PitchConfig pitch_cfg = toy_pitch_config();
  nn::ParamSet<float> pitch_ps(82);
  const pitch::SingerEmbedding singer = toy_singer(pitch_cfg.emb_dim, 83);
  const midi::MidiStream midi = segment_midi();

  linguistic::ScoreLabel label;
  label.phonemes = {1, 2, 3, 4, 5, 6};
  label.durations = {20, 20, 20, 20, 20, 20};

  // Same label ids resolved against two different vocabularies/checkpoints.
  const linguistic::LinguisticConfig cfg_a = toy_ling_config(7);
  const linguistic::LinguisticConfig cfg_b = toy_ling_config(13);
  nn::ParamSet<float> ps_a(91);
  nn::ParamSet<float> ps_b(92);

  const StreamBundle ba =
      inpaint::build_replacement(label, midi, singer, ps_a, cfg_a, pitch_ps, pitch_cfg);
  const StreamBundle bb =
      inpaint::build_replacement(label, midi, singer, ps_b, cfg_b, pitch_ps, pitch_cfg);

  REQUIRE(ba.frames() == bb.frames());
  REQUIRE_FALSE(ba.hlf.features.data.data == bb.hlf.features.data.data);

  // Both bundles splice cleanly into a matching edit plan.
  StreamBundle orig = make_bundle(200, 6, 7, linguistic::HlfProvider::file);
  std::map<std::string, StreamBundle> repl;
  repl["edit"] = ba;
  const EditPlan plan = plan_of(
      {seg(0, 40, Source::keep), seg(40, 160, Source::replace, "edit"), seg(160, 200, Source::keep)});
  const StreamBundle spliced = inpaint::splice_streams(orig, repl, plan);
  REQUIRE(spliced.frames() == 200);
  REQUIRE(spliced.hlf.provider == linguistic::HlfProvider::predicted);

  // And the spliced bundle feeds straight into a conditioner.
  const diffusion::Conditioner cond = inpaint::to_conditioner(spliced, singer);
  REQUIRE(cond.frames() == 200);
}
