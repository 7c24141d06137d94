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

#include "softfail/noise.hpp"
#include "softfail/preprocess.hpp"

namespace softfail {

/// Every intermediate tensor of the feature pipeline for one frame.
struct InspectionDump {
  std::size_t start_sample = 0;
  double sample_rate = 0.0;
  std::vector<double> frame;
  Matrix spectrogram;   // [n_t x (n_fft/2+1)] magnitudes
  Matrix compressed;    // [n_t x n_bins] log-scaled
  Matrix coefficients;  // [n_t x n_bins] DCT over time
  std::vector<double> features;
};

/// Frame starting at `start_sample`; reflection-padded if the trace ends first.
InspectionDump inspect_frame(const NoiseTrace& trace, std::size_t start_sample,
                             const PreprocessConfig& cfg);

void write_matrix_tsv(const Matrix& m, std::ostream& out);

/// Writes <prefix>frame.tsv, <prefix>spectrogram.tsv, <prefix>compressed.tsv
/// and <prefix>dct.tsv.
void write_inspection(const InspectionDump& dump, const std::string& prefix);

}  // namespace softfail
