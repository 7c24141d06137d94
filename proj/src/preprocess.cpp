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

#include "softfail/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace softfail {

namespace {

Matrix apply_dct(const Matrix& t, const Matrix& c) {
  const std::size_t nt = c.rows();
  Matrix out(nt, c.cols());
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n < nt; ++n) acc += t(k, n) * c(n, j);
      out(k, j) = acc;
    }
  }
  return out;
}

}  // namespace

void PreprocessConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, m); };
  if (frame_size == 0) bad("frame_size must be positive");
  if (frame_stride == 0) bad("frame_stride must be >= 1");
  if (fft_size < 2) bad("fft_size must be >= 2");
  if (fft_stride == 0) bad("fft_stride must be >= 1");
  if (fft_size > frame_size) bad("fft_size must not exceed frame_size");
  if (compression_factor == 0) bad("compression_factor must be >= 1");
  if (compression_factor > spectrum_bins()) bad("compression_factor exceeds spectrum bins");
  if (!(log_epsilon > 0.0) || !std::isfinite(log_epsilon)) bad("log_epsilon must be positive");
}

std::size_t PreprocessConfig::num_transforms() const {
  return (frame_size - fft_size) / fft_stride + 1;
}

std::size_t PreprocessConfig::num_bins() const {
  return (spectrum_bins() + compression_factor - 1) / compression_factor;
}

std::size_t frame_count(std::size_t length, const PreprocessConfig& cfg) {
  if (length == 0) return 0;
  if (length < cfg.frame_size) return 1;
  return (length - cfg.frame_size) / cfg.frame_stride + 1;
}

std::vector<double> pad_reflect(std::span<const double> x, std::size_t target) {
  if (x.empty()) fail(ErrorCode::InvalidArgument, "cannot pad an empty block");
  std::vector<double> out(x.begin(), x.end());
  out.reserve(std::max(target, x.size()));
  while (out.size() < target) {
    const std::size_t n = out.size();
    const double edge = out[n - 1];
    if (n == 1) {
      out.resize(target, edge);
      break;
    }
    const std::size_t take = std::min(n - 1, target - n);
    for (std::size_t k = 1; k <= take; ++k) out.push_back(2.0 * edge - out[n - 1 - k]);
  }
  return out;
}

std::vector<Frame> frame_block(const AnnotatedBlock& block, std::size_t block_id,
                               const PreprocessConfig& cfg) {
  const auto samples = block.samples();
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "cannot frame an empty block");
  const std::size_t nf = cfg.frame_size;
  std::vector<Frame> frames;
  if (samples.size() >= nf) {
    const std::size_t count = frame_count(samples.size(), cfg);
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t off = i * cfg.frame_stride;
      const auto w = samples.subspan(off, nf);
      frames.push_back({{w.begin(), w.end()}, block.label, block_id, off});
    }
    return frames;
  }
  if (cfg.allow_padding) {
    frames.push_back({pad_reflect(samples, nf), block.label, block_id, 0});
    return frames;
  }
  // Validation: read the frame from the trace, pad only past the trace end.
  const auto& all = block.trace->samples;
  const std::size_t end = std::min(all.size(), block.start_index + nf);
  std::span<const double> ext(all.data() + block.start_index, end - block.start_index);
  frames.push_back({pad_reflect(ext, nf), block.label, block_id, 0});
  return frames;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

Matrix dct_matrix(std::size_t n) {
  Matrix t(n, n);
  const double nd = static_cast<double>(n);
  const double s0 = 1.0 / std::sqrt(nd);
  const double sk = std::sqrt(2.0 / nd);
  for (std::size_t j = 0; j < n; ++j) t(0, j) = s0;
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      t(k, j) = sk * std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) *
                              static_cast<double>(k) / nd);
    }
  }
  return t;
}

FeatureExtractor::FeatureExtractor(const PreprocessConfig& cfg)
    : cfg_(cfg),
      window_(hann_window(cfg.fft_size)),
      plan_(std::make_shared<const FftPlan>(cfg.fft_size)),
      dct_(dct_matrix(cfg.num_transforms())) {
  cfg_.validate();
}

Matrix FeatureExtractor::spectrogram(std::span<const double> frame) const {
  if (frame.size() < cfg_.fft_size) {
    fail(ErrorCode::DimensionMismatch, "frame shorter than fft_size");
  }
  const std::size_t nt = (frame.size() - cfg_.fft_size) / cfg_.fft_stride + 1;
  Matrix out(nt, cfg_.spectrum_bins());
  std::vector<double> seg(cfg_.fft_size);
  for (std::size_t r = 0; r < nt; ++r) {
    const auto src = frame.subspan(r * cfg_.fft_stride, cfg_.fft_size);
    for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = src[i] * window_[i];
    const auto mags = real_magnitudes(*plan_, seg);
    std::copy(mags.begin(), mags.end(), out.row(r).begin());
  }
  return out;
}

Matrix FeatureExtractor::compress(const Matrix& spec) const {
  return compress_spectrum(spec, cfg_.compression_factor, cfg_.log_epsilon);
}

Matrix FeatureExtractor::dct(const Matrix& c) const {
  return c.rows() == dct_.rows() ? apply_dct(dct_, c) : dct_rows(c);
}

std::vector<double> FeatureExtractor::flatten(const Matrix& coeffs) const {
  std::vector<double> out(coeffs.rows() * coeffs.cols());
  const std::size_t nt = coeffs.rows();
  for (std::size_t j = 0; j < coeffs.cols(); ++j) {
    for (std::size_t k = 0; k < nt; ++k) out[j * nt + k] = coeffs(k, j);
  }
  return out;
}

std::vector<double> FeatureExtractor::extract(std::span<const double> frame) const {
  if (frame.size() != cfg_.frame_size) {
    fail(ErrorCode::DimensionMismatch, "frame length " + std::to_string(frame.size()) +
                                           " != frame_size " +
                                           std::to_string(cfg_.frame_size));
  }
  return flatten(dct(compress(spectrogram(frame))));
}

Matrix spectrogram(std::span<const double> frame, const PreprocessConfig& cfg) {
  return FeatureExtractor(cfg).spectrogram(frame);
}

Matrix compress_spectrum(const Matrix& spec, std::size_t factor, double log_epsilon) {
  if (factor == 0) fail(ErrorCode::InvalidArgument, "compression factor must be >= 1");
  if (!(log_epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "log_epsilon must be positive");
  const std::size_t bins = (spec.cols() + factor - 1) / factor;
  Matrix out(spec.rows(), bins);
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    for (std::size_t j = 0; j < bins; ++j) {
      const std::size_t lo = j * factor;
      const std::size_t hi = std::min(lo + factor, spec.cols());
      double sum = 0.0;
      for (std::size_t c = lo; c < hi; ++c) sum += spec(r, c);
      out(r, j) = std::log(sum / static_cast<double>(hi - lo) + log_epsilon);
    }
  }
  return out;
}

Matrix dct_rows(const Matrix& c) { return apply_dct(dct_matrix(c.rows()), c); }

LabelCounts FeatureSet::counts() const {
  LabelCounts c{};
  for (auto l : labels) ++c[label_index(l)];
  return c;
}

FeatureSet featurize(const Dataset& ds, const PreprocessConfig& base, std::size_t jobs) {
  PreprocessConfig cfg = base;
  cfg.allow_padding = ds.role == DatasetRole::Training;
  const FeatureExtractor fx(cfg);

  std::vector<Frame> frames;
  for (std::size_t b = 0; b < ds.blocks.size(); ++b) {
    auto fs = frame_block(ds.blocks[b], b, cfg);
    for (auto& f : fs) frames.push_back(std::move(f));
  }

  FeatureSet out;
  out.features = Matrix(frames.size(), cfg.feature_length());
  out.labels.resize(frames.size());
  out.origins.resize(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    const auto v = fx.extract(frames[i].samples);
    std::copy(v.begin(), v.end(), out.features.row(i).begin());
    out.labels[i] = frames[i].label;
    out.origins[i] = {frames[i].block_id, frames[i].offset};
  });
  return out;
}

}  // namespace softfail
