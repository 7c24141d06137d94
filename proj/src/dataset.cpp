// Copyright 2026 The softfail Authors. All Rights Reserved.
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

#include "softfail/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "softfail/preprocess.hpp"

namespace softfail {

std::string_view label_name(FailureLabel label) {
  switch (label) {
    case FailureLabel::Ok: return "OK";
    case FailureLabel::Impact: return "Impact";
    case FailureLabel::HighAcc: return "HighAcc";
    case FailureLabel::Oscillations: return "Oscillations";
  }
  return "?";
}

std::optional<FailureLabel> parse_label(std::string_view text) {
  const auto s = to_lower(trim(text));
  if (s == "ok") return FailureLabel::Ok;
  if (s == "impact") return FailureLabel::Impact;
  if (s == "highacc" || s == "high_acc") return FailureLabel::HighAcc;
  if (s == "oscillations") return FailureLabel::Oscillations;
  return std::nullopt;
}

std::string_view role_name(DatasetRole role) {
  return role == DatasetRole::Training ? "training" : "validation";
}

std::optional<DatasetRole> parse_role(std::string_view text) {
  const auto s = to_lower(trim(text));
  if (s == "training" || s == "train") return DatasetRole::Training;
  if (s == "validation" || s == "val") return DatasetRole::Validation;
  return std::nullopt;
}

std::vector<Annotation> parse_annotations(std::istream& in) {
  std::vector<Annotation> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_ws(t);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3) {
      fail(ErrorCode::Parse, where + "expected 't_start t_end label'");
    }
    Annotation a;
    if (!parse_double(fields[0], a.t_start) || !parse_double(fields[1], a.t_end) ||
        !std::isfinite(a.t_start) || !std::isfinite(a.t_end)) {
      fail(ErrorCode::Parse, where + "invalid time value");
    }
    const auto label = parse_label(fields[2]);
    if (!label) fail(ErrorCode::Parse, where + "unknown label '" + std::string(fields[2]) + "'");
    a.label = *label;
    if (!(a.t_end > a.t_start)) fail(ErrorCode::Parse, where + "t_end must exceed t_start");
    if (a.t_start < 0.0) fail(ErrorCode::Parse, where + "negative t_start");
    rows.push_back(a);
  }
  return rows;
}

std::vector<Annotation> read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open annotation file: " + path);
  return parse_annotations(in);
}

void write_annotations(std::span<const Annotation> rows, std::ostream& out) {
  out << "# t_start t_end label\n";
  for (const auto& a : rows) {
    out << format_double(a.t_start) << ' ' << format_double(a.t_end) << ' '
        << to_lower(label_name(a.label)) << '\n';
  }
}

void save_annotations(std::span<const Annotation> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write annotation file: " + path);
  write_annotations(rows, out);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

double Dataset::annotated_seconds() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.length;
  return static_cast<double>(n) / sample_rate;
}

std::vector<Annotation> Dataset::annotations() const {
  std::vector<Annotation> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back({b.t_start, b.t_end, b.label});
  return out;
}

Dataset make_dataset(std::shared_ptr<const NoiseTrace> trace,
                     std::span<const Annotation> annotations, DatasetRole role) {
  if (!trace || trace->samples.empty()) fail(ErrorCode::InvalidArgument, "empty noise trace");
  if (annotations.empty()) fail(ErrorCode::InvalidArgument, "annotation list is empty");
  Dataset ds;
  ds.role = role;
  ds.sample_rate = trace->sample_rate;
  const double rate = trace->sample_rate;
  const std::size_t n = trace->samples.size();
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const auto start = std::llround(a.t_start * rate);
    const auto len = std::llround((a.t_end - a.t_start) * rate);
    const auto desc = "annotation " + std::to_string(i + 1) + " [" + format_double(a.t_start) +
                      ", " + format_double(a.t_end) + ")";
    if (len < 1) fail(ErrorCode::InvalidArgument, desc + " covers no samples");
    if (start < 0 || static_cast<std::size_t>(start + len) > n) {
      fail(ErrorCode::InvalidArgument,
           desc + " exceeds the trace (" + format_double(trace->duration()) + " s)");
    }
    AnnotatedBlock b;
    b.label = a.label;
    b.t_start = a.t_start;
    b.t_end = a.t_end;
    b.start_index = static_cast<std::size_t>(start);
    b.length = static_cast<std::size_t>(len);
    b.trace = trace;
    ds.blocks.push_back(std::move(b));
  }

  std::vector<std::size_t> order(ds.blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ds.blocks[x].start_index < ds.blocks[y].start_index;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = ds.blocks[order[k - 1]];
    const auto& cur = ds.blocks[order[k]];
    if (cur.start_index < prev.start_index + prev.length) {
      warn("annotations " + std::to_string(order[k - 1] + 1) + " and " +
           std::to_string(order[k] + 1) + " overlap");
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& noise_path, const std::string& annotation_path,
                     DatasetRole role) {
  auto trace = std::make_shared<const NoiseTrace>(read_trace(noise_path));
  const auto rows = read_annotations(annotation_path);
  if (rows.empty()) {
    fail(ErrorCode::InvalidArgument, "annotation file has no rows: " + annotation_path);
  }
  return make_dataset(std::move(trace), rows, role);
}

LabelCounts class_counts(const Dataset& ds, const PreprocessConfig& cfg) {
  LabelCounts counts{};
  for (const auto& b : ds.blocks) counts[label_index(b.label)] += frame_count(b.length, cfg);
  return counts;
}

}  // namespace softfail
