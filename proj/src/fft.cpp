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

#include "softfail/fft.hpp"

#include <cmath>
#include <numbers>

#include "softfail/common.hpp"

namespace softfail {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

struct FftPlan::Bluestein {
  std::unique_ptr<FftPlan> inner;
  std::vector<std::complex<double>> chirp;           // e^{-i pi k^2 / n}
  std::vector<std::complex<double>> kernel_spectrum;  // FFT of conj chirp, wrapped
};

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "FFT length must be positive");
  if (is_pow2(n)) {
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    return;
  }

  auto bs = std::make_unique<Bluestein>();
  const std::size_t m = next_pow2(2 * n - 1);
  bs->inner = std::make_unique<FftPlan>(m);
  bs->chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small and exact.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    const double angle = -std::numbers::pi * k2 / static_cast<double>(n);
    bs->chirp[k] = {std::cos(angle), std::sin(angle)};
  }
  bs->kernel_spectrum.assign(m, {0.0, 0.0});
  bs->kernel_spectrum[0] = std::conj(bs->chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    bs->kernel_spectrum[k] = std::conj(bs->chirp[k]);
    bs->kernel_spectrum[m - k] = std::conj(bs->chirp[k]);
  }
  bs->inner->forward(bs->kernel_spectrum);
  bluestein_ = std::move(bs);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::radix2(std::span<std::complex<double>> a, bool inverse) const {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        auto w = twiddles_[j * step];
        if (inverse) w = std::conj(w);
        const auto u = a[i + j];
        const auto v = a[i + j + half] * w;
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) fail(ErrorCode::DimensionMismatch, "FFT input length mismatch");
  if (!bluestein_) {
    radix2(data, false);
    return;
  }
  const auto& bs = *bluestein_;
  const std::size_t m = bs.inner->size();
  std::vector<std::complex<double>> work(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * bs.chirp[k];
  bs.inner->radix2(work, false);
  for (std::size_t k = 0; k < m; ++k) work[k] *= bs.kernel_spectrum[k];
  bs.inner->radix2(work, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * scale * bs.chirp[k];
}

std::vector<double> real_magnitudes(const FftPlan& plan, std::span<const double> x) {
  if (x.size() != plan.size()) fail(ErrorCode::DimensionMismatch, "FFT input length mismatch");
  std::vector<std::complex<double>> buf(x.begin(), x.end());
  plan.forward(buf);
  std::vector<double> mags(plan.size() / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buf[k]);
  return mags;
}

}  // namespace softfail
