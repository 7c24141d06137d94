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

#include "softfail/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace softfail {

namespace {

constexpr double kPruneAlpha = 1e-12;
constexpr double kMinCurvature = 1e-12;

}  // namespace

void Kernel::validate() const {
  if (type == Type::Rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
    fail(ErrorCode::InvalidArgument, "RBF gamma must be positive");
  }
}

double Kernel::pairwise(Type type, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch, "kernel arguments differ in length (" +
                                           std::to_string(a.size()) + " vs " +
                                           std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  if (type == Type::Linear) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
  }
  return acc;
}

double Kernel::from_pairwise(double p) const {
  return type == Type::Linear ? p : std::exp(-gamma * p);
}

std::string_view kernel_name(Kernel::Type type) {
  return type == Kernel::Type::Linear ? "linear" : "rbf";
}

std::optional<Kernel::Type> parse_kernel_type(std::string_view text) {
  const auto s = to_lower(trim(text));
  if (s == "linear") return Kernel::Type::Linear;
  if (s == "rbf") return Kernel::Type::Rbf;
  return std::nullopt;
}

Matrix pairwise_table(const Matrix& a, const Matrix& b, Kernel::Type type, std::size_t jobs) {
  Matrix out(a.rows(), b.rows());
  const bool symmetric = &a == &b;
  parallel_for(a.rows(), jobs, [&](std::size_t i) {
    const std::size_t j0 = symmetric ? i : 0;
    for (std::size_t j = j0; j < b.rows(); ++j) out(i, j) = Kernel::pairwise(type, a.row(i), b.row(j));
  });
  if (symmetric) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i);
    }
  }
  return out;
}

DenseKernelMatrix::DenseKernelMatrix(Matrix gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols()) fail(ErrorCode::DimensionMismatch, "Gram matrix not square");
}

DenseKernelMatrix DenseKernelMatrix::compute(const Matrix& x, const Kernel& kernel,
                                             std::size_t jobs) {
  return from_pairwise(pairwise_table(x, x, kernel.type, jobs), kernel);
}

DenseKernelMatrix DenseKernelMatrix::from_pairwise(const Matrix& table, const Kernel& kernel) {
  Matrix gram(table.rows(), table.cols());
  auto src = table.data();
  auto dst = gram.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = kernel.from_pairwise(src[i]);
  return DenseKernelMatrix(std::move(gram));
}

CachedKernelMatrix::CachedKernelMatrix(const Matrix& x, Kernel kernel, std::size_t capacity_bytes)
    : x_(x), kernel_(kernel) {
  const std::size_t row_bytes = std::max<std::size_t>(1, x.rows()) * sizeof(double);
  capacity_rows_ = std::max<std::size_t>(2, capacity_bytes / row_bytes);
  diag_.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) diag_[i] = kernel_(x.row(i), x.row(i));
}

std::span<const double> CachedKernelMatrix::row(std::size_t i) {
  if (auto it = index_.find(i); it != index_.end()) {
    rows_.splice(rows_.begin(), rows_, it->second);
    return rows_.front().second;
  }
  ++misses_;
  std::vector<double> values(x_.rows());
  for (std::size_t j = 0; j < x_.rows(); ++j) values[j] = kernel_(x_.row(i), x_.row(j));
  if (rows_.size() >= capacity_rows_) {
    index_.erase(rows_.back().first);
    rows_.pop_back();
  }
  rows_.emplace_front(i, std::move(values));
  index_[i] = rows_.begin();
  return rows_.front().second;
}

DualSolution solve_dual(KernelMatrix& kernel, std::span<const int> y, double c,
                        const SmoOptions& opts) {
  const std::size_t n = kernel.size();
  if (y.size() != n) fail(ErrorCode::DimensionMismatch, "label count does not match Gram size");
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::InvalidArgument, "C must be positive");
  for (int v : y) {
    if (v != 1 && v != -1) fail(ErrorCode::InvalidArgument, "binary labels must be +1 or -1");
  }

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  auto& alpha = sol.alpha;
  std::vector<double> grad(n, -1.0);  // Q alpha - e

  auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  double gap = std::numeric_limits<double>::infinity();
  for (;;) {
    // i maximizes -y G over I_up, j minimizes -y G over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -static_cast<double>(y[t]) * grad[t];
      const bool up = y[t] == 1 ? !at_upper(t) : !at_lower(t);
      const bool low = y[t] == 1 ? !at_lower(t) : !at_upper(t);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = (i == n || j == n) ? 0.0 : gmax - gmin;
    if (gap <= opts.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= opts.max_iter) break;
    ++sol.iterations;

    const auto ki = kernel.row(i);
    const auto kj = kernel.row(j);
    const double yi = y[i];
    const double yj = y[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double curvature = kernel.diag(i) + kernel.diag(j) - 2.0 * ki[j];
    if (curvature <= 0.0) curvature = kMinCurvature;

    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / curvature;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / curvature;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = (alpha[i] - old_ai) * yi;
    const double daj = (alpha[j] - old_aj) * yj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += static_cast<double>(y[t]) * (ki[t] * dai + kj[t] * daj);
    }
  }
  sol.kkt_violation = gap;

  // rho from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  double rho = 0.0;
  if (n_free > 0) {
    rho = free_sum / static_cast<double>(n_free);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  }
  sol.bias = -rho;

  // sum a - 1/2 a^T Q a, with Q a = grad + e.
  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] - 0.5 * alpha[t] * (grad[t] + 1.0);
  sol.objective = obj;
  return sol;
}

BinarySvm make_binary_svm(const DualSolution& sol, const Matrix& x, std::span<const int> y,
                          const Kernel& kernel, double c) {
  BinarySvm m;
  m.kernel = kernel;
  m.c = c;
  m.bias = sol.bias;
  m.converged = sol.converged;
  m.kkt_violation = sol.kkt_violation;
  m.iterations = sol.iterations;
  m.support_vectors = Matrix(0, x.cols());
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] < kPruneAlpha) continue;
    m.dual_coefs.push_back(y[i] * sol.alpha[i]);
    m.support_vectors.append_row(x.row(i));
    m.support_indices.push_back(i);
  }
  return m;
}

BinarySvm train_binary(const Matrix& x, std::span<const int> y, const Kernel& kernel, double c,
                       const SmoOptions& opts) {
  kernel.validate();
  if (x.rows() < 2) fail(ErrorCode::InvalidArgument, "binary SVM needs at least two examples");
  if (y.size() != x.rows()) fail(ErrorCode::DimensionMismatch, "label count != example count");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) {
    fail(ErrorCode::SingleClass, "binary SVM needs examples of both signs (single class)");
  }
  const std::size_t n = x.rows();
  DualSolution sol;
  if (n * n * sizeof(double) <= opts.cache_bytes) {
    auto gram = DenseKernelMatrix::compute(x, kernel);
    sol = solve_dual(gram, y, c, opts);
  } else {
    CachedKernelMatrix cache(x, kernel, opts.cache_bytes);
    sol = solve_dual(cache, y, c, opts);
  }
  return make_binary_svm(sol, x, y, kernel, c);
}

double decision_value(const BinarySvm& model, std::span<const double> x) {
  if (model.support_vectors.rows() > 0 && x.size() != model.support_vectors.cols()) {
    fail(ErrorCode::DimensionMismatch,
         "feature length " + std::to_string(x.size()) + " does not match model (" +
             std::to_string(model.support_vectors.cols()) + ")");
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < model.dual_coefs.size(); ++s) {
    acc += model.dual_coefs[s] * model.kernel(model.support_vectors.row(s), x);
  }
  return acc + model.bias;
}

double decision_value_from_pairwise(const BinarySvm& model, std::span<const double> row) {
  double acc = 0.0;
  for (std::size_t s = 0; s < model.dual_coefs.size(); ++s) {
    acc += model.dual_coefs[s] * model.kernel.from_pairwise(row[model.support_indices[s]]);
  }
  return acc + model.bias;
}

double class_weighted_c(std::size_t n_total, std::size_t n_class, double c_hat, double factor) {
  if (n_class == 0) fail(ErrorCode::InvalidArgument, "class has no frames");
  return factor * (static_cast<double>(n_total) / static_cast<double>(n_class)) * c_hat;
}

bool MultiClassSvm::converged() const {
  return std::all_of(machines.begin(), machines.end(),
                     [](const auto& m) { return !m || m->converged; });
}

double MultiClassSvm::max_kkt_violation() const {
  double v = 0.0;
  for (const auto& m : machines) {
    if (m) v = std::max(v, m->kkt_violation);
  }
  return v;
}

namespace {

MultiClassSvm train_multiclass_impl(const FeatureSet& train, const PreprocessConfig& cfg,
                                    const TrainOptions& opts, DenseKernelMatrix* shared) {
  opts.kernel.validate();
  cfg.validate();
  if (!(opts.c_hat > 0.0)) fail(ErrorCode::InvalidArgument, "c_hat must be positive");
  if (!(opts.class_weight_factor > 0.0)) {
    fail(ErrorCode::InvalidArgument, "class_weight_factor must be positive");
  }
  if (train.features.cols() != cfg.feature_length()) {
    fail(ErrorCode::DimensionMismatch, "feature length does not match preprocessing config");
  }
  const auto counts = train.counts();
  const std::size_t present = static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  if (present < 2) {
    fail(ErrorCode::SingleClass, "training data contains a single class; no rest class exists");
  }
  for (auto label : kAllLabels) {
    if (counts[label_index(label)] == 0) {
      warn("class " + std::string(label_name(label)) +
           " absent from training data; no machine trained");
    }
  }

  MultiClassSvm model;
  model.preprocess = cfg;
  model.kernel = opts.kernel;
  model.c_hat = opts.c_hat;
  model.class_weight_factor = opts.class_weight_factor;
  model.feature_length = cfg.feature_length();

  const std::size_t n = train.size();
  std::vector<FailureLabel> todo;
  for (auto label : kAllLabels) {
    if (counts[label_index(label)] > 0) todo.push_back(label);
  }
  parallel_for(todo.size(), shared ? opts.jobs : 1, [&](std::size_t k) {
    const auto label = todo[k];
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = train.labels[i] == label ? 1 : -1;
    const double c = class_weighted_c(n, counts[label_index(label)], opts.c_hat,
                                      opts.class_weight_factor);
    BinarySvm m;
    if (shared) {
      m = make_binary_svm(solve_dual(*shared, y, c, opts.smo), train.features, y, opts.kernel, c);
    } else {
      m = train_binary(train.features, y, opts.kernel, c, opts.smo);
    }
    model.machines[label_index(label)] = std::move(m);
  });
  return model;
}

}  // namespace

MultiClassSvm train_multiclass(const FeatureSet& train, const PreprocessConfig& cfg,
                               const TrainOptions& opts) {
  const std::size_t n = train.size();
  if (n * n * sizeof(double) <= opts.smo.cache_bytes) {
    opts.kernel.validate();
    auto gram = DenseKernelMatrix::compute(train.features, opts.kernel, opts.jobs);
    return train_multiclass_impl(train, cfg, opts, &gram);
  }
  return train_multiclass_impl(train, cfg, opts, nullptr);
}

MultiClassSvm train_multiclass(const FeatureSet& train, const PreprocessConfig& cfg,
                               const TrainOptions& opts, DenseKernelMatrix& gram) {
  if (gram.size() != train.size()) fail(ErrorCode::DimensionMismatch, "Gram size mismatch");
  return train_multiclass_impl(train, cfg, opts, &gram);
}

DecisionValues decision_values(const MultiClassSvm& model, std::span<const double> x) {
  if (x.size() != model.feature_length) {
    fail(ErrorCode::DimensionMismatch, "feature length " + std::to_string(x.size()) +
                                           " does not match model feature length " +
                                           std::to_string(model.feature_length));
  }
  DecisionValues out;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    if (model.machines[k]) out[k] = decision_value(*model.machines[k], x);
  }
  return out;
}

FailureLabel argmax_label(const DecisionValues& values) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    if (!values[k]) continue;
    if (!best || *values[k] > *values[*best]) best = k;
  }
  if (!best) fail(ErrorCode::InvalidArgument, "model has no trained machines");
  return static_cast<FailureLabel>(*best);
}

FailureLabel predict(const MultiClassSvm& model, std::span<const double> x) {
  return argmax_label(decision_values(model, x));
}

}  // namespace softfail
