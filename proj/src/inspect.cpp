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

#include "softfail/inspect.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

namespace softfail {

InspectionDump inspect_frame(const NoiseTrace& trace, std::size_t start_sample,
                             const PreprocessConfig& cfg) {
  cfg.validate();
  if (start_sample >= trace.samples.size()) {
    fail(ErrorCode::InvalidArgument, "start sample " + std::to_string(start_sample) +
                                         " beyond trace of " +
                                         std::to_string(trace.samples.size()) + " samples");
  }
  const FeatureExtractor fx(cfg);
  InspectionDump d;
  d.start_sample = start_sample;
  d.sample_rate = trace.sample_rate;
  const std::size_t end = std::min(trace.samples.size(), start_sample + cfg.frame_size);
  std::span<const double> avail(trace.samples.data() + start_sample, end - start_sample);
  d.frame = pad_reflect(avail, cfg.frame_size);
  d.spectrogram = fx.spectrogram(d.frame);
  d.compressed = fx.compress(d.spectrogram);
  d.coefficients = fx.dct(d.compressed);
  d.features = fx.flatten(d.coefficients);
  return d;
}

void write_matrix_tsv(const Matrix& m, std::ostream& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << '\t';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  return out;
}

}  // namespace

void write_inspection(const InspectionDump& d, const std::string& prefix) {
  {
    auto out = open_out(prefix + "frame.tsv");
    out << "t\tsample\n";
    for (std::size_t i = 0; i < d.frame.size(); ++i) {
      out << format_double(static_cast<double>(d.start_sample + i) / d.sample_rate) << '\t'
          << format_double(d.frame[i]) << '\n';
    }
  }
  {
    auto out = open_out(prefix + "spectrogram.tsv");
    write_matrix_tsv(d.spectrogram, out);
  }
  {
    auto out = open_out(prefix + "compressed.tsv");
    write_matrix_tsv(d.compressed, out);
  }
  {
    auto out = open_out(prefix + "dct.tsv");
    write_matrix_tsv(d.coefficients, out);
  }
}

}  // namespace softfail
