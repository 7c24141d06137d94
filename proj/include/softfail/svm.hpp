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
#include <iosfwd>
#include <list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "softfail/common.hpp"
#include "softfail/dataset.hpp"
#include "softfail/preprocess.hpp"

namespace softfail {

struct Kernel {
  enum class Type { Linear, Rbf };

  Type type = Type::Rbf;
  double gamma = 0.0;  // RBF only

  static Kernel linear() { return {Type::Linear, 0.0}; }
  static Kernel rbf(double gamma) { return {Type::Rbf, gamma}; }

  void validate() const;

  /// The kernel is a function of one pairwise quantity: the dot product for
  /// the linear kernel, the squared distance for RBF. Computing it through
  /// pairwise() + from_pairwise() is bit-identical to operator().
  static double pairwise(Type type, std::span<const double> a, std::span<const double> b);
  double from_pairwise(double p) const;
  double operator()(std::span<const double> a, std::span<const double> b) const {
    return from_pairwise(pairwise(type, a, b));
  }

  bool operator==(const Kernel&) const = default;
};

std::string_view kernel_name(Kernel::Type type);
std::optional<Kernel::Type> parse_kernel_type(std::string_view text);

/// Pairwise table P[i][j] = Kernel::pairwise(type, a_i, b_j).
Matrix pairwise_table(const Matrix& a, const Matrix& b, Kernel::Type type, std::size_t jobs = 1);

/// Row access to the Gram matrix K(x_i, x_j) of a training set.
class KernelMatrix {
 public:
  virtual ~KernelMatrix() = default;
  virtual std::size_t size() const = 0;
  /// Valid until the second-next call to row() on this object.
  virtual std::span<const double> row(std::size_t i) = 0;
  virtual double diag(std::size_t i) const = 0;
};

/// Fully materialized Gram matrix; row() is safe to call concurrently.
class DenseKernelMatrix final : public KernelMatrix {
 public:
  explicit DenseKernelMatrix(Matrix gram);
  static DenseKernelMatrix compute(const Matrix& x, const Kernel& kernel, std::size_t jobs = 1);
  /// Applies the kernel to a precomputed pairwise table.
  static DenseKernelMatrix from_pairwise(const Matrix& table, const Kernel& kernel);

  std::size_t size() const override { return gram_.rows(); }
  std::span<const double> row(std::size_t i) override { return gram_.row(i); }
  double diag(std::size_t i) const override { return gram_(i, i); }
  const Matrix& gram() const { return gram_; }

 private:
  Matrix gram_;
};

/// Gram rows computed on demand, least-recently-used eviction.
class CachedKernelMatrix final : public KernelMatrix {
 public:
  CachedKernelMatrix(const Matrix& x, Kernel kernel, std::size_t capacity_bytes);

  std::size_t size() const override { return x_.rows(); }
  std::span<const double> row(std::size_t i) override;
  double diag(std::size_t i) const override { return diag_[i]; }

  std::size_t capacity_rows() const { return capacity_rows_; }
  std::size_t cached_rows() const { return rows_.size(); }
  std::uint64_t misses() const { return misses_; }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;

  const Matrix& x_;
  Kernel kernel_;
  std::size_t capacity_rows_;
  std::vector<double> diag_;
  std::list<Entry> rows_;  // front = most recent
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
  std::uint64_t misses_ = 0;
};

struct SmoOptions {
  double tol = 1e-3;
  std::uint64_t max_iter = 10'000'000;
  std::size_t cache_bytes = std::size_t{256} << 20;
};

/// Solution of max_a  sum a_i - 1/2 a^T Q a,  y^T a = 0,  0 <= a_i <= C,
/// with Q_ij = y_i y_j K_ij.
struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;
  /// Maximal violating-pair gap at exit.
  double kkt_violation = 0.0;
  std::uint64_t iterations = 0;
  bool converged = false;
};

/// Two-variable SMO with maximal-violating-pair working-set selection.
/// `y` holds +1 / -1.
DualSolution solve_dual(KernelMatrix& kernel, std::span<const int> y, double c,
                        const SmoOptions& opts = {});

struct BinarySvm {
  Kernel kernel;
  double c = 0.0;
  double bias = 0.0;
  std::vector<double> dual_coefs;  // y_i * alpha_i
  Matrix support_vectors;
  /// Training-set row of each support vector; not persisted.
  std::vector<std::size_t> support_indices;
  bool converged = true;
  double kkt_violation = 0.0;
  std::uint64_t iterations = 0;
};

/// Keeps vectors with alpha >= 1e-12.
BinarySvm make_binary_svm(const DualSolution& sol, const Matrix& x, std::span<const int> y,
                          const Kernel& kernel, double c);

BinarySvm train_binary(const Matrix& x, std::span<const int> y, const Kernel& kernel, double c,
                       const SmoOptions& opts = {});

/// sum_i dual_coefs_i K(sv_i, x) + bias.
double decision_value(const BinarySvm& model, std::span<const double> x);

/// Same as decision_value, reading kernel pairwise values from a table row
/// indexed by training-set position (support_indices).
double decision_value_from_pairwise(const BinarySvm& model, std::span<const double> pairwise_row);

struct TrainOptions {
  Kernel kernel = Kernel::rbf(5.7e-4);
  double c_hat = 1.1;
  /// C_cls = factor * (N / N_cls) * c_hat.
  double class_weight_factor = 0.25;
  SmoOptions smo;
  std::size_t jobs = 1;
};

double class_weighted_c(std::size_t n_total, std::size_t n_class, double c_hat,
                        double factor = 0.25);

struct MultiClassSvm {
  PreprocessConfig preprocess;
  Kernel kernel;
  double c_hat = 0.0;
  double class_weight_factor = 0.25;
  std::size_t feature_length = 0;
  std::array<std::optional<BinarySvm>, kNumLabels> machines;

  bool converged() const;
  double max_kkt_violation() const;
};

/// One-vs-rest training on featurized frames.
MultiClassSvm train_multiclass(const FeatureSet& train, const PreprocessConfig& cfg,
                               const TrainOptions& opts);
/// As above with a shared precomputed Gram matrix over `train`.
MultiClassSvm train_multiclass(const FeatureSet& train, const PreprocessConfig& cfg,
                               const TrainOptions& opts, DenseKernelMatrix& gram);

using DecisionValues = std::array<std::optional<double>, kNumLabels>;

DecisionValues decision_values(const MultiClassSvm& model, std::span<const double> x);
/// Argmax over present machines; ties go to the earlier label.
FailureLabel argmax_label(const DecisionValues& values);
FailureLabel predict(const MultiClassSvm& model, std::span<const double> x);

/// Versioned text model format; doubles are written in shortest
/// round-trip form so save/load is lossless.
void write_model(const MultiClassSvm& model, std::ostream& out);
MultiClassSvm parse_model(std::istream& in);
void save_model(const MultiClassSvm& model, const std::string& path);
MultiClassSvm load_model(const std::string& path);

}  // namespace softfail
