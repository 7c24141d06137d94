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

#include "softfail/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace softfail {

namespace {

constexpr double kStepTolerance = 1e-9;

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

void JointTrajectory::validate() const {
  if (timestamps.empty()) fail(ErrorCode::InvalidArgument, "empty trajectory");
  if (qdot.cols() == 0) {
    fail(ErrorCode::InvalidArgument, "trajectory has no actual-velocity columns");
  }
  if (qdot.rows() != timestamps.size()) {
    fail(ErrorCode::InvalidArgument, "qdot row count does not match timestamps");
  }
  if (qdot_desired.cols() > 0 && qdot_desired.rows() != timestamps.size()) {
    fail(ErrorCode::InvalidArgument, "qdot_desired row count does not match timestamps");
  }
  if (timestamps.size() < 2) {
    fail(ErrorCode::InvalidArgument,
         "trajectory needs at least two rows to determine the sample rate");
  }
  const double step = timestamps[1] - timestamps[0];
  if (!(step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "timestamps not strictly increasing at index 1");
  }
  for (std::size_t i = 2; i < timestamps.size(); ++i) {
    const double d = timestamps[i] - timestamps[i - 1];
    if (!(d > 0.0)) {
      fail(ErrorCode::InvalidArgument,
           "timestamps not strictly increasing at index " + std::to_string(i));
    }
    if (std::abs(d - step) > kStepTolerance * step) {
      fail(ErrorCode::InvalidArgument,
           "non-uniform timestep at index " + std::to_string(i) + " (step " +
               format_double(d) + " vs " + format_double(step) + ")");
    }
  }
}

double JointTrajectory::sample_rate() const {
  if (timestamps.size() < 2) {
    fail(ErrorCode::InvalidArgument, "sample rate needs at least two timestamps");
  }
  const double span = timestamps.back() - timestamps.front();
  return static_cast<double>(timestamps.size() - 1) / span;
}

NoiseTrace estimate_noise(const JointTrajectory& traj) {
  traj.validate();
  NoiseTrace out;
  out.sample_rate = traj.sample_rate();
  out.samples.resize(traj.timestamps.size());
  const bool has_desired = traj.qdot_desired.cols() > 0;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    CompensatedSum acc;
    for (double v : traj.qdot.row(i)) acc.add(v * v);
    if (has_desired) {
      for (double v : traj.qdot_desired.row(i)) acc.add(v * v);
    }
    out.samples[i] = std::sqrt(std::max(acc.value(), 0.0));
  }
  return out;
}

std::vector<std::string> ColumnSpec::parse_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto tok : split(text, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.emplace_back(tok);
  }
  return out;
}

namespace {

// Resolves selectors against the header; returns file column indices.
std::vector<std::size_t> resolve_columns(const std::vector<std::string>& selectors,
                                         const std::vector<std::string>& header) {
  std::vector<std::size_t> cols;
  for (const auto& sel : selectors) {
    auto named = std::find(header.begin(), header.end(), sel);
    if (named != header.end()) {
      cols.push_back(static_cast<std::size_t>(named - header.begin()));
      continue;
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    const auto dash = sel.find('-');
    bool ok = false;
    if (dash == std::string::npos) {
      ok = parse_size(sel, lo);
      hi = lo;
    } else {
      ok = parse_size(std::string_view(sel).substr(0, dash), lo) &&
           parse_size(std::string_view(sel).substr(dash + 1), hi) && lo <= hi;
    }
    if (!ok) fail(ErrorCode::InvalidArgument, "missing column: " + sel);
    if (lo == 0 || hi >= header.size()) {
      fail(ErrorCode::InvalidArgument,
           "column index out of range: " + sel + " (file has " +
               std::to_string(header.size()) + " columns, timestamp at 0)");
    }
    for (std::size_t c = lo; c <= hi; ++c) cols.push_back(c);
  }
  return cols;
}

}  // namespace

JointTrajectory parse_trajectory(std::istream& in, const ColumnSpec& spec) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    for (auto f : split(line, '\t')) header.emplace_back(trim(f));
    break;
  }
  if (header.empty()) fail(ErrorCode::Parse, "trajectory file has no header line");
  if (header.size() < 2) {
    fail(ErrorCode::Parse, line_error(line_no, "header needs a timestamp and at least one velocity column"));
  }

  const auto desired = resolve_columns(spec.desired, header);
  std::vector<std::size_t> actual;
  if (spec.actual.empty()) {
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (std::find(desired.begin(), desired.end(), c) == desired.end()) actual.push_back(c);
    }
  } else {
    actual = resolve_columns(spec.actual, header);
  }
  if (actual.empty()) fail(ErrorCode::InvalidArgument, "no actual-velocity columns selected");

  JointTrajectory traj;
  traj.qdot = Matrix(0, actual.size());
  traj.qdot_desired = Matrix(0, desired.size());
  std::vector<double> values(header.size());
  std::vector<double> row_a(actual.size());
  std::vector<double> row_d(desired.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != header.size()) {
      fail(ErrorCode::Parse, line_error(line_no, "expected " + std::to_string(header.size()) +
                                                     " fields, found " +
                                                     std::to_string(fields.size())));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], values[c]) || !std::isfinite(values[c])) {
        fail(ErrorCode::Parse, line_error(line_no, "non-numeric cell in column '" +
                                                       header[c] + "': '" +
                                                       std::string(trim(fields[c])) + "'"));
      }
    }
    if (!traj.timestamps.empty() && !(values[0] > traj.timestamps.back())) {
      fail(ErrorCode::Parse, line_error(line_no, "timestamps must be strictly increasing"));
    }
    traj.timestamps.push_back(values[0]);
    for (std::size_t k = 0; k < actual.size(); ++k) row_a[k] = values[actual[k]];
    for (std::size_t k = 0; k < desired.size(); ++k) row_d[k] = values[desired[k]];
    traj.qdot.append_row(row_a);
    if (!desired.empty()) traj.qdot_desired.append_row(row_d);
  }
  traj.validate();
  return traj;
}

JointTrajectory read_trajectory(const std::string& path, const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open trajectory file: " + path);
  return parse_trajectory(in, spec);
}

NoiseTrace parse_trace(std::istream& in) {
  NoiseTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_rate = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (!have_rate) {
      if (t.substr(0, 5) != "rate=" || !parse_double(t.substr(5), trace.sample_rate) ||
          !(trace.sample_rate > 0.0) || !std::isfinite(trace.sample_rate)) {
        fail(ErrorCode::Parse, line_error(line_no, "expected 'rate=<Hz>' header"));
      }
      have_rate = true;
      continue;
    }
    double v = 0.0;
    if (!parse_double(t, v) || !std::isfinite(v)) {
      fail(ErrorCode::Parse, line_error(line_no, "invalid sample '" + std::string(t) + "'"));
    }
    if (v < 0.0) fail(ErrorCode::Parse, line_error(line_no, "negative noise sample"));
    trace.samples.push_back(v);
  }
  if (!have_rate) fail(ErrorCode::Parse, "noise trace has no 'rate=' header");
  if (trace.samples.empty()) fail(ErrorCode::Parse, "noise trace has no samples");
  return trace;
}

NoiseTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open noise trace: " + path);
  return parse_trace(in);
}

void write_trace(const NoiseTrace& trace, std::ostream& out) {
  out << "rate=" << format_double(trace.sample_rate) << '\n';
  for (double v : trace.samples) out << format_double(v) << '\n';
}

void save_trace(const NoiseTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write noise trace: " + path);
  write_trace(trace, out);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

}  // namespace softfail
