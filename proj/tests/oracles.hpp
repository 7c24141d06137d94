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

// Slow, obviously-correct reference computations. Nothing here calls into the
// library under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

// |X_k| for k = 0..n/2 by the O(n^2) definition. The twiddle index is
// reduced modulo n, so every term uses an exactly tabulated angle.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<long double> cs(n), sn(n);
  for (std::size_t m = 0; m < n; ++m) {
    const long double a = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(m) /
                          static_cast<long double>(n);
    cs[m] = std::cos(a);
    sn[m] = std::sin(a);
  }
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      re += x[j] * cs[idx];
      im -= x[j] * sn[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return out;
}

// Full-spectrum energy sum_k |X_k|^2 reconstructed from the half spectrum of a
// real signal.
inline double energy_from_half_spectrum(const std::vector<double>& mags, std::size_t n) {
  double e = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    const bool mirrored = k != 0 && !(n % 2 == 0 && k == n / 2);
    e += (mirrored ? 2.0 : 1.0) * mags[k] * mags[k];
  }
  return e;
}

// Orthonormal DCT-II written out term by term:
//   X_0 = sqrt(1/n) sum_j x_j
//   X_k = sqrt(2/n) sum_j x_j cos(pi (j + 1/2) k / n)
inline std::vector<double> dct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      s += x[j] * std::cos(std::numbers::pi_v<long double> * (j + 0.5L) * k / n);
    }
    out[k] = static_cast<double>(s * std::sqrt((k == 0 ? 1.0L : 2.0L) / n));
  }
  return out;
}

struct QpResult {
  std::vector<double> alpha;
  double objective = 0.0;  // sum(alpha) - 1/2 alpha^T Q alpha
};

inline double dual_objective(const std::vector<double>& q, const std::vector<double>& a) {
  const std::size_t m = a.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < m; ++j) quad += a[i] * q[i * m + j] * a[j];
  }
  return lin - 0.5 * quad;
}

// Euclidean projection onto {0 <= a <= c, y^T a = 0}: a(l) = clip(v - l y) and
// y^T a(l) is non-increasing in l, so bisect on l.
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                                   double c) {
  const std::size_t m = v.size();
  auto at = [&](double l, std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = std::clamp(v[i] - l * y[i], 0.0, c);
      s += y[i] * a[i];
    }
    return s;
  };
  std::vector<double> a(m);
  double lo = -1.0, hi = 1.0;
  while (at(lo, a) < 0.0) lo *= 2.0;
  while (at(hi, a) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (at(mid, a) > 0.0 ? lo : hi) = mid;
  }
  at(0.5 * (lo + hi), a);
  return a;
}

// Accelerated projected gradient ascent on the C-SVC dual with Q_ij =
// y_i y_j K_ij, run until the step falls below `tol`.
inline QpResult solve_qp(const std::vector<double>& kernel, const std::vector<int>& y, double c,
                         double tol = 1e-10, int max_iter = 2'000'000) {
  const std::size_t m = y.size();
  std::vector<double> q(m * m);
  double lip = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      q[i * m + j] = y[i] * y[j] * kernel[i * m + j];
      lip += q[i * m + j] * q[i * m + j];
    }
  }
  const double step = 1.0 / std::max(std::sqrt(lip), 1e-12);  // Frobenius bounds the spectrum
  std::vector<double> a(m, 0.0), z = a, prev = a, v(m);
  double t = 1.0;
  double best = dual_objective(q, a);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double g = 1.0;
      for (std::size_t j = 0; j < m; ++j) g -= q[i * m + j] * z[j];
      v[i] = z[i] + step * g;
    }
    prev = a;
    a = project(v, y, c);
    const double obj = dual_objective(q, a);
    double diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) diff = std::max(diff, std::abs(a[i] - prev[i]));
    // Restart the momentum whenever the objective drops.
    if (obj < best) {
      t = 1.0;
      z = a;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < m; ++i) z[i] = a[i] + (t - 1.0) / tn * (a[i] - prev[i]);
      t = tn;
    }
    best = std::max(best, obj);
    if (diff < tol && it > 10) break;
  }
  return {a, dual_objective(q, a)};
}

}  // namespace oracle
