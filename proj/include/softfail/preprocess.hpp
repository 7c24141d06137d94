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

#include <memory>
#include <span>
#include <vector>

#include "softfail/common.hpp"
#include "softfail/dataset.hpp"
#include "softfail/fft.hpp"

namespace softfail {

struct PreprocessConfig {
  std::size_t frame_size = 4000;
  std::size_t frame_stride = 1000;
  std::size_t fft_size = 1024;
  std::size_t fft_stride = 834;
  std::size_t compression_factor = 3;
  double log_epsilon = 1e-10;
  /// Short blocks are reflection-padded when true, and extended from the
  /// surrounding trace when false. Dataset-level helpers set this from the
  /// dataset role.
  bool allow_padding = true;

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  std::size_t spectrum_bins() const { return fft_size / 2 + 1; }
  /// n_t = floor((frame_size - fft_size) / fft_stride) + 1.
  std::size_t num_transforms() const;
  /// ceil((fft_size / 2 + 1) / compression_factor).
  std::size_t num_bins() const;
  std::size_t feature_length() const { return num_bins() * num_transforms(); }

  bool operator==(const PreprocessConfig&) const = default;
};

/// Number of frames a block of `length` samples yields.
std::size_t frame_count(std::size_t length, const PreprocessConfig& cfg);

struct Frame {
  std::vector<double> samples;
  FailureLabel label = FailureLabel::Ok;
  std::size_t block_id = 0;
  std::size_t offset = 0;
};

/// Odd reflection about the final sample,
///   padded[n_c - 1 + k] = 2 x[n_c - 1] - x[n_c - 1 - k],
/// repeated segment-wise until `target` samples exist.
std::vector<double> pad_reflect(std::span<const double> x, std::size_t target);

std::vector<Frame> frame_block(const AnnotatedBlock& block, std::size_t block_id,
                               const PreprocessConfig& cfg);

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> hann_window(std::size_t n);

/// Orthonormal DCT-II matrix T (n x n), X = T x:
///   T[0][j] = 1/sqrt(n),  T[k][j] = sqrt(2/n) cos(pi (j + 1/2) k / n).
Matrix dct_matrix(std::size_t n);

/// Holds the window, FFT plan and DCT basis for one configuration.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const PreprocessConfig& cfg);

  const PreprocessConfig& config() const noexcept { return cfg_; }

  /// [n_t x (n_fft/2+1)] Hann-windowed FFT magnitudes, no end padding.
  Matrix spectrogram(std::span<const double> frame) const;
  /// [n_t x n_bins]: log(mean of each bin group + log_epsilon).
  Matrix compress(const Matrix& spectrogram) const;
  /// DCT over time for every frequency bin; result [n_t x n_bins] with row k
  /// holding coefficient k.
  Matrix dct(const Matrix& compressed) const;
  /// Frequency-major flattening: out[j * n_t + k] = dct(k, j).
  std::vector<double> flatten(const Matrix& coefficients) const;

  std::vector<double> extract(std::span<const double> frame) const;

 private:
  PreprocessConfig cfg_;
  std::vector<double> window_;
  std::shared_ptr<const FftPlan> plan_;
  Matrix dct_;
};

/// Free-function forms of the pipeline stages.
Matrix spectrogram(std::span<const double> frame, const PreprocessConfig& cfg);
Matrix compress_spectrum(const Matrix& spec, std::size_t factor, double log_epsilon);
Matrix dct_rows(const Matrix& compressed);

struct FrameOrigin {
  std::size_t block_id = 0;
  std::size_t offset = 0;
};

/// Feature matrix (one row per frame) with labels and provenance.
struct FeatureSet {
  Matrix features;
  std::vector<FailureLabel> labels;
  std::vector<FrameOrigin> origins;

  std::size_t size() const { return labels.size(); }
  LabelCounts counts() const;
};

/// Frames and featurizes every block. Padding follows the dataset role
/// (training pads, validation extends); `cfg.allow_padding` is ignored.
FeatureSet featurize(const Dataset& ds, const PreprocessConfig& cfg, std::size_t jobs = 1);

}  // namespace softfail
