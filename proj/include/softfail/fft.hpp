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

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace softfail {

/// Forward complex DFT of a fixed length, X_k = sum_n x_n e^{-2 pi i k n / N}.
/// Power-of-two lengths use an iterative radix-2 transform; any other length
/// goes through Bluestein's chirp-z reformulation on a padded radix-2 plan.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const noexcept { return n_; }

  /// In-place transform; `data.size()` must equal size().
  void forward(std::span<std::complex<double>> data) const;

 private:
  struct Bluestein;

  void radix2(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t n_ = 0;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bitrev_;
  std::unique_ptr<Bluestein> bluestein_;
};

/// Magnitudes |X_k| for k = 0..n/2 of a real input of length n.
std::vector<double> real_magnitudes(const FftPlan& plan, std::span<const double> x);

}  // namespace softfail
