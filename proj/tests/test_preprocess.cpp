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

#include <softfail/fft.hpp>
#include <softfail/preprocess.hpp>

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace softfail;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

AnnotatedBlock block_over(std::shared_ptr<const NoiseTrace> trace, std::size_t start, std::size_t len) {
  AnnotatedBlock b;
  b.trace = std::move(trace);
  b.start_index = start;
  b.length = len;
  b.label = FailureLabel::Impact;
  return b;
}

std::shared_ptr<NoiseTrace> ramp_trace(std::size_t n) {
  auto t = std::make_shared<NoiseTrace>();
  t->sample_rate = 10000.0;
  for (std::size_t i = 0; i < n; ++i) t->samples.push_back(static_cast<double>(i));
  return t;
}

}  // namespace

TEST_CASE("feature shapes at the reference settings") {
  PreprocessConfig cfg;
  cfg.fft_stride = 401;
  CHECK(cfg.num_transforms() == 8);
  CHECK(cfg.num_bins() == 171);
  CHECK(cfg.feature_length() == 1368);
  cfg.fft_stride = 834;
  CHECK(cfg.num_transforms() == 4);
  CHECK(cfg.feature_length() == 684);
  const auto frame = random_vec(4000, 1, 0.0, 2.0);
  CHECK(spectrogram(frame, cfg).rows() == 4);
  CHECK(spectrogram(frame, cfg).cols() == 513);
  CHECK(FeatureExtractor(cfg).extract(frame).size() == 684);
  cfg.fft_stride = 401;
  CHECK(spectrogram(frame, cfg).rows() == 8);
}

TEST_CASE("shape chain formula holds across configs") {
  for (std::size_t nfft : {256, 512, 1024}) {
    for (std::size_t stride : {100, 401, 999}) {
      for (std::size_t factor : {1, 2, 3, 5}) {
        PreprocessConfig cfg;
        cfg.fft_size = nfft;
        cfg.fft_stride = stride;
        cfg.compression_factor = factor;
        const std::size_t bins = (nfft / 2 + 1 + factor - 1) / factor;
        const std::size_t nt = (4000 - nfft) / stride + 1;
        CHECK(cfg.feature_length() == bins * nt);
        CHECK(FeatureExtractor(cfg).extract(random_vec(4000, nfft + stride)).size() == bins * nt);
      }
    }
  }
}

TEST_CASE("config validation") {
  PreprocessConfig cfg;
  cfg.fft_size = 5000;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.frame_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.compression_factor = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("frame counts and offsets") {
  PreprocessConfig cfg;
  auto trace = ramp_trace(20000);
  const auto f = frame_block(block_over(trace, 100, 6000), 0, cfg);
  REQUIRE(f.size() == 3);
  CHECK(f[0].offset == 0);
  CHECK(f[1].offset == 1000);
  CHECK(f[2].offset == 2000);
  CHECK(f[2].samples.front() == 2100.0);
  CHECK(frame_block(block_over(trace, 0, 4000), 0, cfg).size() == 1);
  CHECK(frame_count(4999, cfg) == 1);
  CHECK(frame_count(5000, cfg) == 2);
}

TEST_CASE("short blocks: training pads, validation extends from the trace") {
  PreprocessConfig cfg;
  auto trace = ramp_trace(10000);
  for (auto& v : trace->samples) v = std::sin(v * 0.01);
  const auto b = block_over(trace, 1000, 2000);

  const auto padded = frame_block(b, 0, cfg);
  REQUIRE(padded.size() == 1);
  REQUIRE(padded[0].samples.size() == 4000);
  const auto& p = padded[0].samples;
  for (std::size_t k = 1; k < 2000; ++k) {
    REQUIRE(p[1999 + k] == doctest::Approx(2.0 * p[1999] - p[1999 - k]).epsilon(1e-15));
  }

  cfg.allow_padding = false;
  const auto ext = frame_block(b, 0, cfg);
  for (std::size_t i = 0; i < 4000; ++i) REQUIRE(ext[0].samples[i] == trace->samples[1000 + i]);

  // Near the end of the trace the extension runs out and reflection fills in.
  const auto tail = frame_block(block_over(trace, 8000, 1500), 0, cfg);
  REQUIRE(tail[0].samples.size() == 4000);
  CHECK(tail[0].samples[1999] == trace->samples[9999]);
  CHECK(tail[0].samples[2000] == doctest::Approx(2.0 * trace->samples[9999] - trace->samples[9998]));
}

TEST_CASE("odd reflection padding") {
  CHECK(pad_reflect(std::vector<double>{0, 1, 2}, 5) == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(pad_reflect(std::vector<double>{0, 1, 0}, 5) == std::vector<double>{0, 1, 0, -1, 0});
  for (double v : pad_reflect(std::vector<double>(7, 2.5), 4000)) REQUIRE(v == 2.5);
  CHECK(pad_reflect(std::vector<double>{3.0}, 4) == std::vector<double>{3, 3, 3, 3});
  // Longer than one reflection: reflect again about the new end.
  const auto r = pad_reflect(std::vector<double>{0, 1, 0}, 9);
  CHECK(r == std::vector<double>{0, 1, 0, -1, 0, 1, 0, -1, 0});
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto x = random_vec(2 + s * 37, s);
    const auto y = pad_reflect(x, 4000);
    const std::size_t n = x.size();
    REQUIRE(std::abs(y[n] - x[n - 1]) == doctest::Approx(std::abs(x[n - 1] - x[n - 2])));
  }
}

TEST_CASE("Hann window is periodic") {
  const auto w = hann_window(1024);
  CHECK(w[0] == 0.0);
  CHECK(w[512] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < 512; ++i) REQUIRE(w[i] == doctest::Approx(w[1024 - i]).epsilon(1e-14));
}

TEST_CASE("FFT magnitudes match the naive DFT, Parseval holds") {
  for (std::size_t n : {1, 2, 8, 1024, 12, 100, 1000}) {
    FftPlan plan(n);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto x = random_vec(n, n * 10 + s);
      const auto fast = real_magnitudes(plan, x);
      const auto slow = oracle::dft_magnitudes(x);
      REQUIRE(fast.size() == slow.size());
      double peak = 0.0;
      for (double v : slow) peak = std::max(peak, v);
      for (std::size_t k = 0; k < fast.size(); ++k) REQUIRE(std::abs(fast[k] - slow[k]) <= 1e-9 * peak);
      double time_energy = 0.0;
      for (double v : x) time_energy += v * v;
      CHECK(oracle::energy_from_half_spectrum(fast, n) ==
            doctest::Approx(static_cast<double>(n) * time_energy).epsilon(1e-9));
    }
  }
}

TEST_CASE("pure tone at a bin frequency stays in its bin") {
  PreprocessConfig cfg;
  const std::size_t k = 37;
  std::vector<double> frame(4000);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    frame[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k * i) / 1024.0);
  }
  const auto s = spectrogram(frame, cfg);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double peak = s(r, k);
    CHECK(peak == doctest::Approx(256.0).epsilon(1e-9));  // A * n / 4 under Hann
    CHECK(s(r, k - 1) == doctest::Approx(128.0).epsilon(1e-9));
    CHECK(s(r, k + 1) == doctest::Approx(128.0).epsilon(1e-9));
    for (std::size_t b = 0; b < s.cols(); ++b) {
      if (b + 1 < k || b > k + 1) REQUIRE(s(r, b) < 1e-10 * peak);
    }
  }
}

TEST_CASE("spectral compression") {
  Matrix ones(2, 513, 1.0);
  const auto c = compress_spectrum(ones, 3, 1e-10);
  CHECK(c.cols() == 171);
  for (double v : c.data()) REQUIRE(std::abs(v) < 1e-9);
  Matrix m(1, 3);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(0, 2) = 3;
  CHECK(compress_spectrum(m, 3, 1e-10)(0, 0) == std::log(2.0 + 1e-10));
  Matrix zeros(1, 6, 0.0);
  CHECK(compress_spectrum(zeros, 3, 1e-10)(0, 1) == std::log(1e-10));
  // A trailing partial group averages what it has.
  Matrix four(1, 4);
  four(0, 3) = 8.0;
  CHECK(compress_spectrum(four, 3, 1e-10)(0, 1) == std::log(8.0 + 1e-10));
}

TEST_CASE("DCT matrix is orthonormal and matches direct summation") {
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto t = dct_matrix(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += t(i, k) * t(j, k);
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
    REQUIRE(worst < 1e-9);
  }
  for (std::size_t n : {1, 2, 3, 4, 8, 16}) {
    const auto x = random_vec(n, 100 + n);
    Matrix col(n, 1);
    for (std::size_t i = 0; i < n; ++i) col(i, 0) = x[i];
    const auto got = dct_rows(col);
    const auto want = oracle::dct2(x);
    for (std::size_t k = 0; k < n; ++k) REQUIRE(std::abs(got(k, 0) - want[k]) <= 1e-12);
  }
}

TEST_CASE("DCT worked examples") {
  Matrix c(4, 3, 2.5);
  const auto d = dct_rows(c);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(d(0, b) == doctest::Approx(2.0 * 2.5));
    for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(d(k, b)) < 1e-12);
  }
  Matrix one(1, 5);
  for (std::size_t b = 0; b < 5; ++b) one(0, b) = b - 1.5;
  CHECK(dct_rows(one) == one);
}

TEST_CASE("feature vector is the frequency-major flattening of the chain") {
  PreprocessConfig cfg;
  cfg.fft_stride = 401;
  const auto frame = random_vec(4000, 77, 0.0, 3.0);
  FeatureExtractor fx(cfg);
  const auto s = fx.spectrogram(frame);
  const auto c = fx.compress(s);
  const auto d = fx.dct(c);
  const auto v = fx.extract(frame);
  REQUIRE(v.size() == 1368);
  for (std::size_t bin = 0; bin < 171; ++bin) {
    std::vector<double> column(8);
    for (std::size_t t = 0; t < 8; ++t) column[t] = c(t, bin);
    const auto want = oracle::dct2(column);
    for (std::size_t k = 0; k < 8; ++k) {
      REQUIRE(v[bin * 8 + k] == d(k, bin));
      REQUIRE(std::abs(v[bin * 8 + k] - want[k]) <= 1e-9 * std::max(1.0, std::abs(want[k])));
    }
  }
  CHECK(fx.extract(frame) == v);
}

TEST_CASE("silence stays finite") {
  PreprocessConfig cfg;
  const auto v = FeatureExtractor(cfg).extract(std::vector<double>(4000, 0.0));
  for (double x : v) REQUIRE(std::isfinite(x));
}

TEST_CASE("featurize is deterministic regardless of job count") {
  auto trace = std::make_shared<NoiseTrace>();
  trace->sample_rate = 10000.0;
  trace->samples = random_vec(30000, 4, 0.0, 2.0);
  std::vector<Annotation> ann = {{0.0, 1.2, FailureLabel::Ok}, {1.2, 1.45, FailureLabel::Impact},
                                 {1.45, 3.0, FailureLabel::Oscillations}};
  PreprocessConfig cfg;
  for (auto role : {DatasetRole::Training, DatasetRole::Validation}) {
    const auto ds = make_dataset(trace, ann, role);
    const auto a = featurize(ds, cfg, 1);
    const auto b = featurize(ds, cfg, 4);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.size() == 9 + 1 + 12);
  }
}
