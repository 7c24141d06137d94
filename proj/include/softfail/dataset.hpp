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

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "softfail/noise.hpp"

namespace softfail {

/// Persisted integer codes are the enumerator values.
enum class FailureLabel : int { Ok = 0, Impact = 1, HighAcc = 2, Oscillations = 3 };

inline constexpr std::size_t kNumLabels = 4;
inline constexpr std::array<FailureLabel, kNumLabels> kAllLabels = {
    FailureLabel::Ok, FailureLabel::Impact, FailureLabel::HighAcc,
    FailureLabel::Oscillations};

constexpr std::size_t label_index(FailureLabel l) { return static_cast<std::size_t>(l); }

/// "OK", "Impact", "HighAcc", "Oscillations".
std::string_view label_name(FailureLabel label);
/// Case-insensitive; also accepts "high_acc".
std::optional<FailureLabel> parse_label(std::string_view text);

/// One hand-set annotation row: the half-open interval [t_start, t_end).
struct Annotation {
  double t_start = 0.0;
  double t_end = 0.0;
  FailureLabel label = FailureLabel::Ok;

  bool operator==(const Annotation&) const = default;
};

std::vector<Annotation> parse_annotations(std::istream& in);
std::vector<Annotation> read_annotations(const std::string& path);
void write_annotations(std::span<const Annotation> rows, std::ostream& out);
void save_annotations(std::span<const Annotation> rows, const std::string& path);

/// A labelled slice of a noise trace. Keeps the trace alive so that
/// validation framing can read past the annotated end.
struct AnnotatedBlock {
  FailureLabel label = FailureLabel::Ok;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t start_index = 0;
  std::size_t length = 0;
  std::shared_ptr<const NoiseTrace> trace;

  std::span<const double> samples() const {
    return std::span<const double>(trace->samples).subspan(start_index, length);
  }
};

enum class DatasetRole { Training, Validation };

std::string_view role_name(DatasetRole role);
std::optional<DatasetRole> parse_role(std::string_view text);

struct Dataset {
  std::vector<AnnotatedBlock> blocks;
  DatasetRole role = DatasetRole::Training;
  double sample_rate = 0.0;

  /// Total annotated signal in seconds.
  double annotated_seconds() const;
  std::vector<Annotation> annotations() const;
};

/// Cuts one block per annotation: start = round(t_start * rate),
/// length = round((t_end - t_start) * rate). Rejects intervals leaving the
/// trace, empty blocks and an empty annotation list; warns on overlaps.
Dataset make_dataset(std::shared_ptr<const NoiseTrace> trace,
                     std::span<const Annotation> annotations, DatasetRole role);

Dataset load_dataset(const std::string& noise_path, const std::string& annotation_path,
                     DatasetRole role);

struct PreprocessConfig;

using LabelCounts = std::array<std::size_t, kNumLabels>;

/// Frames per label under the framing rule of `cfg` (every label present).
LabelCounts class_counts(const Dataset& ds, const PreprocessConfig& cfg);

}  // namespace softfail
