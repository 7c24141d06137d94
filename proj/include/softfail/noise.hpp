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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softfail/common.hpp"

namespace softfail {

/// Actual and desired joint velocities on a shared, uniformly spaced time
/// axis. Rows are time steps; `qdot` has n >= 1 columns, `qdot_desired` may
/// have zero columns but must have the same row count.
struct JointTrajectory {
  std::vector<double> timestamps;
  Matrix qdot;
  Matrix qdot_desired;

  /// Throws InvalidArgument on an empty trajectory, mismatched row counts or a
  /// timestep that deviates by more than 1e-9 (relative) from the first one.
  void validate() const;

  /// 1 / timestep. Requires at least two rows.
  double sample_rate() const;
};

/// Uniformly sampled scalar noise-pressure quantifier.
struct NoiseTrace {
  double sample_rate = 0.0;
  std::vector<double> samples;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  bool operator==(const NoiseTrace&) const = default;
};

/// sample[i] = sqrt(sum_j qdot[i,j]^2 + sum_k qdot_desired[i,k]^2), with the
/// squares accumulated in column order by compensated summation.
NoiseTrace estimate_noise(const JointTrajectory& traj);

/// Selects which trajectory-file columns hold actual and desired velocities.
///
/// Each selector is either a header name or an index / inclusive index range
/// ("3", "1-30") counting file columns from 0 (column 0 is the timestamp).
/// A header name takes precedence over the index reading of the same token.
/// An empty `actual` list selects every non-timestamp column that is not
/// listed as desired.
struct ColumnSpec {
  std::vector<std::string> actual;
  std::vector<std::string> desired;

  /// Parses a comma-separated selector list such as "qd0,qd1,5-8".
  static std::vector<std::string> parse_list(std::string_view text);
};

/// Reads a tab-separated trajectory log: a header line of column names,
/// the first column timestamps in seconds, the remaining columns numeric.
JointTrajectory read_trajectory(const std::string& path, const ColumnSpec& spec);
JointTrajectory parse_trajectory(std::istream& in, const ColumnSpec& spec);

/// Noise trace text format: "rate=<Hz>" then one decimal sample per line.
NoiseTrace read_trace(const std::string& path);
NoiseTrace parse_trace(std::istream& in);
void write_trace(const NoiseTrace& trace, std::ostream& out);
void save_trace(const NoiseTrace& trace, const std::string& path);

}  // namespace softfail
