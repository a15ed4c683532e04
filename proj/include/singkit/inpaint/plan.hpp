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

#include <sstream>
#include <string>
#include <vector>

#include "singkit/core/errors.hpp"

// Edit plans for inpainting: an ordered list of frame ranges, each either
// kept from the original streams or replaced by a named predicted bundle.

namespace singkit::inpaint {

enum class Source { keep, replace };

inline const char* source_name(Source s) {
  return s == Source::keep ? "KEEP" : "REPLACE";
}

// One half-open frame range [start, end). REPLACE segments name the bundle
// that fills them; KEEP segments leave replacement_id empty.
struct Segment {
  int start = 0;
  int end = 0;
  Source source = Source::keep;
  std::string replacement_id;

  int frames() const { return end - start; }

  std::string range_str() const {
    return "[" + std::to_string(start) + ", " + std::to_string(end) + ")";
  }
};

struct EditPlan {
  std::vector<Segment> segments;
};

// Checks that the segments tile [0, T) exactly and returns a normalized
// copy: KEEP ids cleared and adjacent KEEP segments merged. Adjacent REPLACE
// segments are left alone even when they name the same bundle, because each
// REPLACE segment independently requires a bundle of its own length; merging
// two of them would change which bundles the plan accepts.
inline EditPlan validate_plan(const EditPlan& plan, int T) {
  if (T < 1) throw ValueError("validate_plan: T must be >= 1, got " + std::to_string(T));
  if (plan.segments.empty()) throw ValueError("validate_plan: plan has no segments");

  EditPlan out;
  int cursor = 0;
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    Segment seg = plan.segments[i];
    if (seg.end <= seg.start)
      throw ValueError("validate_plan: segment " + std::to_string(i) + " " + seg.range_str() +
                       " is empty (end must exceed start)");
    if (seg.start > cursor)
      throw ValueError("validate_plan: gap at frame " + std::to_string(cursor) + " (segment " +
                       std::to_string(i) + " starts at " + std::to_string(seg.start) + ")");
    if (seg.start < cursor)
      throw ValueError("validate_plan: overlap at frame " + std::to_string(seg.start) +
                       " (previous segment ends at " + std::to_string(cursor) + ")");
    if (seg.end > T)
      throw ValueError("validate_plan: segment " + std::to_string(i) + " " + seg.range_str() +
                       " runs past T = " + std::to_string(T));
    if (seg.source == Source::replace && seg.replacement_id.empty())
      throw ValueError("validate_plan: REPLACE segment " + seg.range_str() +
                       " has no replacement_id");
    if (seg.source == Source::keep) seg.replacement_id.clear();

    if (!out.segments.empty() && out.segments.back().source == Source::keep &&
        seg.source == Source::keep) {
      out.segments.back().end = seg.end;
    } else {
      out.segments.push_back(seg);
    }
    cursor = seg.end;
  }
  if (cursor != T)
    throw ValueError("validate_plan: gap at frame " + std::to_string(cursor) +
                     " (plan covers [0, " + std::to_string(cursor) + ") but T = " +
                     std::to_string(T) + ")");
  return out;
}

// Edit-script TSV, one segment per line:
//   start_frame <TAB> end_frame <TAB> KEEP|REPLACE <TAB> replacement_id
// KEEP lines use "-" in the id column. Blank lines and '#' comments are
// skipped. Structural validation is left to validate_plan.

inline std::string format_plan_tsv(const EditPlan& plan) {
  std::ostringstream os;
  for (const Segment& seg : plan.segments) {
    os << seg.start << '\t' << seg.end << '\t' << source_name(seg.source) << '\t'
       << (seg.source == Source::keep ? std::string("-") : seg.replacement_id) << '\n';
  }
  return os.str();
}

inline EditPlan parse_plan_tsv(const std::string& text) {
  EditPlan plan;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 4)
      throw ParseError("edit plan line " + std::to_string(line_no) + ": expected 4 columns, got " +
                       std::to_string(cols.size()));

    Segment seg;
    try {
      std::size_t used = 0;
      seg.start = std::stoi(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument(cols[0]);
      seg.end = std::stoi(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument(cols[1]);
    } catch (const std::exception&) {
      throw ParseError("edit plan line " + std::to_string(line_no) + ": bad frame number '" +
                       cols[0] + "' / '" + cols[1] + "'");
    }
    if (cols[2] == "KEEP") {
      seg.source = Source::keep;
    } else if (cols[2] == "REPLACE") {
      seg.source = Source::replace;
    } else {
      throw ParseError("edit plan line " + std::to_string(line_no) + ": source must be KEEP or " +
                       "REPLACE, got '" + cols[2] + "'");
    }
    seg.replacement_id = cols[3] == "-" ? std::string() : cols[3];
    plan.segments.push_back(seg);
  }
  return plan;
}

} // namespace singkit::inpaint
