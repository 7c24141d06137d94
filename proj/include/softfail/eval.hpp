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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "softfail/dataset.hpp"
#include "softfail/preprocess.hpp"
#include "softfail/svm.hpp"

namespace softfail {

using Confusion = std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels>;

/// Metrics over classified frames. FN and FP fractions use the total frame
/// count as denominator; the detection rate uses the number of frames whose
/// true label is not OK.
struct EvaluationReport {
  Confusion confusion{};  // [true][predicted]
  std::uint64_t n_frames = 0;
  std::array<double, kNumLabels> per_class_fn{};
  std::array<double, kNumLabels> per_class_fp{};
  double failure_detection_rate = 0.0;
  double subset_accuracy = 0.0;

  static EvaluationReport from_confusion(const Confusion& confusion);

  std::uint64_t fn_count(FailureLabel c) const;
  std::uint64_t fp_count(FailureLabel c) const;
  std::uint64_t correct() const;
  std::uint64_t failure_frames() const;
  std::uint64_t detected_failures() const;

  bool operator==(const EvaluationReport&) const = default;
};

EvaluationReport evaluate_predictions(std::span<const FailureLabel> truth,
                                      std::span<const FailureLabel> predicted);

/// Frames the dataset with the model's preprocessing (never padding short
/// blocks; they are extended from the trace) and classifies every frame.
/// `preprocess_override`, when given, replaces the model's configuration and
/// must yield the model's feature length.
EvaluationReport evaluate(const MultiClassSvm& model, const Dataset& validation,
                          std::size_t jobs = 1,
                          const PreprocessConfig* preprocess_override = nullptr);

/// Classification of one frame of an unannotated trace.
struct FramePrediction {
  double t_start = 0.0;
  double t_end = 0.0;
  FailureLabel label = FailureLabel::Ok;
  DecisionValues values;
  bool padded = false;
};

/// Slides the model's frame over the whole trace (frames that fit entirely);
/// a trace shorter than one frame yields a single reflection-padded frame.
std::vector<FramePrediction> predict_trace(const MultiClassSvm& model, const NoiseTrace& trace,
                                           std::size_t jobs = 1);

enum class ReportFormat { Table, Tsv };

std::string render_report(const EvaluationReport& report, ReportFormat format);

struct HyperGrid {
  Kernel::Type kernel = Kernel::Type::Rbf;
  std::vector<std::size_t> fft_strides;
  std::vector<double> c_hats;
  std::vector<double> gammas;  // ignored for the linear kernel

  /// fft_strides {201, 401, 601, 834, 1200}; c_hats 10^-2..10^2 and gammas
  /// 10^-5..10^-1, nine log-spaced points each.
  static HyperGrid defaults(Kernel::Type kernel);

  void validate() const;
  std::size_t size() const;
};

struct GridPoint {
  std::size_t index = 0;
  std::size_t fft_stride = 0;
  double c_hat = 0.0;
  double gamma = 0.0;
};

/// Row-major enumeration: stride outermost, gamma innermost.
GridPoint grid_point(const HyperGrid& grid, std::size_t index);

struct GridRow {
  GridPoint point;
  EvaluationReport report;
  bool converged = true;
  double max_kkt_violation = 0.0;
};

struct GridSearchOptions {
  std::size_t jobs = 1;
  /// Completed combinations are appended here and skipped on a rerun.
  std::string journal_path;
};

struct GridSearchResult {
  HyperGrid grid;
  std::vector<GridRow> rows;  // indexed by GridPoint::index
  std::size_t best = 0;
};

/// Highest subset accuracy, then highest detection rate, then lowest fft
/// stride, then lowest index.
std::size_t select_best(std::span<const GridRow> rows);

GridSearchResult grid_search(const Dataset& train, const Dataset& validation,
                             const HyperGrid& grid, const PreprocessConfig& base_config,
                             const TrainOptions& base_options,
                             const GridSearchOptions& options = {});

std::string render_grid(const GridSearchResult& result, const PreprocessConfig& base_config,
                        ReportFormat format);

}  // namespace softfail
