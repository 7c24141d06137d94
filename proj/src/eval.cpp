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

#include "softfail/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace softfail {

EvaluationReport EvaluationReport::from_confusion(const Confusion& confusion) {
  EvaluationReport r;
  r.confusion = confusion;
  for (const auto& row : confusion) {
    for (auto v : row) r.n_frames += v;
  }
  if (r.n_frames == 0) fail(ErrorCode::InvalidArgument, "no frames to evaluate");
  const double n = static_cast<double>(r.n_frames);
  for (auto c : kAllLabels) {
    r.per_class_fn[label_index(c)] = static_cast<double>(r.fn_count(c)) / n;
    r.per_class_fp[label_index(c)] = static_cast<double>(r.fp_count(c)) / n;
  }
  r.subset_accuracy = static_cast<double>(r.correct()) / n;
  const auto failures = r.failure_frames();
  // No failure frames means nothing was missed.
  r.failure_detection_rate =
      failures == 0 ? 1.0
                    : static_cast<double>(r.detected_failures()) / static_cast<double>(failures);
  return r;
}

std::uint64_t EvaluationReport::fn_count(FailureLabel c) const {
  const auto k = label_index(c);
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < kNumLabels; ++p) {
    if (p != k) s += confusion[k][p];
  }
  return s;
}

std::uint64_t EvaluationReport::fp_count(FailureLabel c) const {
  const auto k = label_index(c);
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < kNumLabels; ++t) {
    if (t != k) s += confusion[t][k];
  }
  return s;
}

std::uint64_t EvaluationReport::correct() const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < kNumLabels; ++k) s += confusion[k][k];
  return s;
}

std::uint64_t EvaluationReport::failure_frames() const {
  std::uint64_t s = 0;
  for (std::size_t t = 1; t < kNumLabels; ++t) {
    for (auto v : confusion[t]) s += v;
  }
  return s;
}

std::uint64_t EvaluationReport::detected_failures() const {
  std::uint64_t s = 0;
  for (std::size_t t = 1; t < kNumLabels; ++t) {
    for (std::size_t p = 1; p < kNumLabels; ++p) s += confusion[t][p];
  }
  return s;
}

EvaluationReport evaluate_predictions(std::span<const FailureLabel> truth,
                                      std::span<const FailureLabel> predicted) {
  if (truth.size() != predicted.size()) {
    fail(ErrorCode::DimensionMismatch, "truth and prediction counts differ");
  }
  if (truth.empty()) fail(ErrorCode::InvalidArgument, "empty validation set");
  Confusion c{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++c[label_index(truth[i])][label_index(predicted[i])];
  }
  return EvaluationReport::from_confusion(c);
}

EvaluationReport evaluate(const MultiClassSvm& model, const Dataset& validation, std::size_t jobs,
                          const PreprocessConfig* preprocess_override) {
  if (validation.blocks.empty()) fail(ErrorCode::InvalidArgument, "empty validation set");
  const PreprocessConfig cfg = preprocess_override ? *preprocess_override : model.preprocess;
  cfg.validate();
  if (cfg.feature_length() != model.feature_length) {
    fail(ErrorCode::DimensionMismatch,
         "feature size mismatch: data yields " + std::to_string(cfg.feature_length()) +
             ", model expects " + std::to_string(model.feature_length));
  }
  Dataset val = validation;
  val.role = DatasetRole::Validation;
  const auto fs = featurize(val, cfg, jobs);
  std::vector<FailureLabel> pred(fs.size());
  parallel_for(fs.size(), jobs,
               [&](std::size_t i) { pred[i] = predict(model, fs.features.row(i)); });
  return evaluate_predictions(fs.labels, pred);
}

std::vector<FramePrediction> predict_trace(const MultiClassSvm& model, const NoiseTrace& trace,
                                           std::size_t jobs) {
  if (trace.samples.empty()) fail(ErrorCode::InvalidArgument, "empty noise trace");
  const auto& cfg = model.preprocess;
  const FeatureExtractor fx(cfg);
  const std::size_t n = trace.samples.size();
  const std::size_t count = frame_count(n, cfg);
  const double rate = trace.sample_rate;
  std::vector<FramePrediction> out(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    auto& p = out[i];
    std::vector<double> frame;
    if (n < cfg.frame_size) {
      frame = pad_reflect(trace.samples, cfg.frame_size);
      p.padded = true;
    } else {
      const auto begin = trace.samples.begin() + static_cast<std::ptrdiff_t>(i * cfg.frame_stride);
      frame.assign(begin, begin + static_cast<std::ptrdiff_t>(cfg.frame_size));
    }
    p.values = decision_values(model, fx.extract(frame));
    p.label = argmax_label(p.values);
    p.t_start = static_cast<double>(i * cfg.frame_stride) / rate;
    p.t_end = p.t_start + static_cast<double>(p.padded ? n : cfg.frame_size) / rate;
  });
  return out;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
  return buf;
}

}  // namespace

std::string render_report(const EvaluationReport& r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Tsv) {
    out << "metric";
    for (auto c : kAllLabels) out << '\t' << label_name(c);
    out << '\n' << "false_negative";
    for (auto c : kAllLabels) out << '\t' << format_double(r.per_class_fn[label_index(c)]);
    out << '\n' << "false_positive";
    for (auto c : kAllLabels) out << '\t' << format_double(r.per_class_fp[label_index(c)]);
    out << '\n';
    for (auto t : kAllLabels) {
      out << "confusion_true_" << label_name(t);
      for (auto p : kAllLabels) out << '\t' << r.confusion[label_index(t)][label_index(p)];
      out << '\n';
    }
    out << "failure_detection_rate\t" << format_double(r.failure_detection_rate) << '\n'
        << "subset_accuracy\t" << format_double(r.subset_accuracy) << '\n'
        << "n_frames\t" << r.n_frames << '\n';
    return out.str();
  }

  char line[160];
  std::snprintf(line, sizeof(line), "%-24s%10s%10s%10s%14s\n", "", "OK", "Impact", "HighAcc",
                "Oscillations");
  out << line;
  auto row = [&](const char* name, const std::array<double, kNumLabels>& v) {
    std::snprintf(line, sizeof(line), "%-24s%10s%10s%10s%14s\n", name, pct(v[0]).c_str(),
                  pct(v[1]).c_str(), pct(v[2]).c_str(), pct(v[3]).c_str());
    out << line;
  };
  row("False negative errors", r.per_class_fn);
  row("False positive errors", r.per_class_fp);
  out << "Failure detection rate  " << pct(r.failure_detection_rate) << '\n'
      << "Subset accuracy         " << pct(r.subset_accuracy) << '\n'
      << "Frames                  " << r.n_frames << '\n'
      << "Confusion (rows true, columns predicted):\n";
  for (auto t : kAllLabels) {
    const auto& c = r.confusion[label_index(t)];
    std::snprintf(line, sizeof(line), "  %-14s%10llu%10llu%10llu%14llu\n",
                  std::string(label_name(t)).c_str(), static_cast<unsigned long long>(c[0]),
                  static_cast<unsigned long long>(c[1]), static_cast<unsigned long long>(c[2]),
                  static_cast<unsigned long long>(c[3]));
    out << line;
  }
  return out.str();
}

HyperGrid HyperGrid::defaults(Kernel::Type kernel) {
  HyperGrid g;
  g.kernel = kernel;
  g.fft_strides = {201, 401, 601, 834, 1200};
  for (int i = 0; i < 9; ++i) g.c_hats.push_back(std::pow(10.0, -2.0 + 0.5 * i));
  if (kernel == Kernel::Type::Rbf) {
    for (int i = 0; i < 9; ++i) g.gammas.push_back(std::pow(10.0, -5.0 + 0.5 * i));
  }
  return g;
}

void HyperGrid::validate() const {
  if (fft_strides.empty()) fail(ErrorCode::InvalidArgument, "grid has no fft strides");
  if (c_hats.empty()) fail(ErrorCode::InvalidArgument, "grid has no C values");
  for (auto s : fft_strides) {
    if (s == 0) fail(ErrorCode::InvalidArgument, "fft stride must be >= 1");
  }
  for (auto c : c_hats) {
    if (!(c > 0.0)) fail(ErrorCode::InvalidArgument, "grid C values must be positive");
  }
  if (kernel == Kernel::Type::Rbf) {
    if (gammas.empty()) fail(ErrorCode::InvalidArgument, "RBF grid has no gamma values");
    for (auto g : gammas) {
      if (!(g > 0.0)) fail(ErrorCode::InvalidArgument, "grid gamma values must be positive");
    }
  }
}

std::size_t HyperGrid::size() const {
  const std::size_t ng = kernel == Kernel::Type::Rbf ? gammas.size() : 1;
  return fft_strides.size() * c_hats.size() * ng;
}

GridPoint grid_point(const HyperGrid& grid, std::size_t index) {
  const std::size_t ng = grid.kernel == Kernel::Type::Rbf ? grid.gammas.size() : 1;
  const std::size_t nc = grid.c_hats.size();
  GridPoint p;
  p.index = index;
  p.fft_stride = grid.fft_strides[index / (nc * ng)];
  p.c_hat = grid.c_hats[(index / ng) % nc];
  p.gamma = grid.kernel == Kernel::Type::Rbf ? grid.gammas[index % ng] : 0.0;
  return p;
}

std::size_t select_best(std::span<const GridRow> rows) {
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "no grid results");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[best];
    // Integer comparisons (cross-multiplied counts) keep the ordering exact.
    const auto acc_a = a.report.correct() * b.report.n_frames;
    const auto acc_b = b.report.correct() * a.report.n_frames;
    if (acc_a != acc_b) {
      if (acc_a > acc_b) best = i;
      continue;
    }
    if (a.report.failure_detection_rate != b.report.failure_detection_rate) {
      if (a.report.failure_detection_rate > b.report.failure_detection_rate) best = i;
      continue;
    }
    if (a.point.fft_stride < b.point.fft_stride) best = i;
  }
  return best;
}

namespace {

constexpr std::string_view kJournalHeader = "index\tfft_stride\tc_hat\tgamma\tconverged\tmax_kkt";

std::string journal_line(const GridRow& row) {
  std::ostringstream out;
  out << row.point.index << '\t' << row.point.fft_stride << '\t' << format_double(row.point.c_hat)
      << '\t' << format_double(row.point.gamma) << '\t' << (row.converged ? 1 : 0) << '\t'
      << format_double(row.max_kkt_violation);
  for (const auto& r : row.report.confusion) {
    for (auto v : r) out << '\t' << v;
  }
  return out.str();
}

// Completed rows from an existing journal whose parameters match `grid`.
std::map<std::size_t, GridRow> read_journal(const std::string& path, const HyperGrid& grid) {
  std::map<std::size_t, GridRow> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.substr(0, 5) == "index") continue;
    const auto f = split(t, '\t');
    if (f.size() != 6 + kNumLabels * kNumLabels) continue;  // torn line from an interrupt
    GridRow row;
    std::size_t index = 0;
    std::size_t conv = 0;
    if (!parse_size(f[0], index) || index >= grid.size()) continue;
    const auto expected = grid_point(grid, index);
    std::size_t stride = 0;
    double c = 0.0;
    double g = 0.0;
    if (!parse_size(f[1], stride) || !parse_double(f[2], c) || !parse_double(f[3], g) ||
        !parse_size(f[4], conv) || !parse_double(f[5], row.max_kkt_violation)) {
      continue;
    }
    if (stride != expected.fft_stride || c != expected.c_hat || g != expected.gamma) continue;
    Confusion cm{};
    bool ok = true;
    for (std::size_t k = 0; k < kNumLabels * kNumLabels && ok; ++k) {
      std::uint64_t v = 0;
      ok = parse_u64(f[6 + k], v);
      cm[k / kNumLabels][k % kNumLabels] = v;
    }
    if (!ok) continue;
    row.point = expected;
    row.converged = conv != 0;
    row.report = EvaluationReport::from_confusion(cm);
    done[index] = row;
  }
  return done;
}

}  // namespace

GridSearchResult grid_search(const Dataset& train, const Dataset& validation,
                             const HyperGrid& grid, const PreprocessConfig& base_config,
                             const TrainOptions& base_options, const GridSearchOptions& options) {
  grid.validate();
  if (validation.blocks.empty()) fail(ErrorCode::InvalidArgument, "empty validation set");
  if (train.sample_rate != validation.sample_rate) {
    warn("training and validation sample rates differ");
  }
  GridSearchResult result;
  result.grid = grid;
  result.rows.resize(grid.size());
  std::vector<bool> have(grid.size(), false);

  std::ofstream journal;
  std::mutex journal_mutex;
  if (!options.journal_path.empty()) {
    for (auto& [index, row] : read_journal(options.journal_path, grid)) {
      result.rows[index] = row;
      have[index] = true;
    }
    bool fresh = true;
    bool torn = false;
    if (std::ifstream probe(options.journal_path, std::ios::binary | std::ios::ate); probe) {
      const auto size = static_cast<std::streamoff>(probe.tellg());
      fresh = size == 0;
      if (!fresh) {
        probe.seekg(size - 1);
        torn = probe.get() != '\n';
      }
    }
    journal.open(options.journal_path, std::ios::app | std::ios::binary);
    if (!journal) fail(ErrorCode::Io, "cannot open journal: " + options.journal_path);
    // An interrupted write can leave a partial last line; start a fresh one.
    if (torn) journal << '\n' << std::flush;
    if (fresh) {
      journal << kJournalHeader;
      for (auto t : kAllLabels) {
        for (auto p : kAllLabels) journal << "\tcm_" << label_name(t) << '_' << label_name(p);
      }
      journal << '\n' << std::flush;
    }
  }

  Dataset val = validation;
  val.role = DatasetRole::Validation;
  const std::size_t per_stride = grid.size() / grid.fft_strides.size();

  for (std::size_t si = 0; si < grid.fft_strides.size(); ++si) {
    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < per_stride; ++k) {
      if (!have[si * per_stride + k]) pending.push_back(si * per_stride + k);
    }
    if (pending.empty()) continue;

    PreprocessConfig cfg = base_config;
    cfg.fft_stride = grid.fft_strides[si];
    cfg.validate();
    const auto train_fs = featurize(train, cfg, options.jobs);
    const auto val_fs = featurize(val, cfg, options.jobs);
    const std::size_t n = train_fs.size();
    const bool precompute = n * n * sizeof(double) <= base_options.smo.cache_bytes;
    Matrix train_table;
    Matrix cross_table;
    if (precompute) {
      train_table = pairwise_table(train_fs.features, train_fs.features, grid.kernel, options.jobs);
      cross_table = pairwise_table(val_fs.features, train_fs.features, grid.kernel, options.jobs);
    }

    parallel_for(pending.size(), options.jobs, [&](std::size_t k) {
      const auto point = grid_point(grid, pending[k]);
      TrainOptions opts = base_options;
      opts.kernel = grid.kernel == Kernel::Type::Rbf ? Kernel::rbf(point.gamma) : Kernel::linear();
      opts.c_hat = point.c_hat;
      opts.jobs = 1;
      GridRow row;
      row.point = point;
      std::vector<FailureLabel> pred(val_fs.size());
      if (precompute) {
        auto gram = DenseKernelMatrix::from_pairwise(train_table, opts.kernel);
        const auto model = train_multiclass(train_fs, cfg, opts, gram);
        for (std::size_t v = 0; v < val_fs.size(); ++v) {
          DecisionValues dv;
          for (std::size_t c = 0; c < kNumLabels; ++c) {
            if (model.machines[c]) {
              dv[c] = decision_value_from_pairwise(*model.machines[c], cross_table.row(v));
            }
          }
          pred[v] = argmax_label(dv);
        }
        row.converged = model.converged();
        row.max_kkt_violation = model.max_kkt_violation();
      } else {
        const auto model = train_multiclass(train_fs, cfg, opts);
        for (std::size_t v = 0; v < val_fs.size(); ++v) {
          pred[v] = predict(model, val_fs.features.row(v));
        }
        row.converged = model.converged();
        row.max_kkt_violation = model.max_kkt_violation();
      }
      row.report = evaluate_predictions(val_fs.labels, pred);
      if (!row.converged) {
        warn("grid point " + std::to_string(point.index) + " did not converge");
      }
      result.rows[point.index] = row;
      if (journal.is_open()) {
        std::lock_guard lock(journal_mutex);
        journal << journal_line(row) << '\n' << std::flush;
      }
    });
  }
  result.best = select_best(result.rows);
  return result;
}

std::string render_grid(const GridSearchResult& result, const PreprocessConfig& base_config,
                        ReportFormat format) {
  std::ostringstream out;
  auto shape = [&](std::size_t stride) {
    PreprocessConfig c = base_config;
    c.fft_stride = stride;
    return std::pair{c.num_transforms(), c.feature_length()};
  };
  if (format == ReportFormat::Tsv) {
    out << "index\tkernel\tfft_stride\tn_t\tfeature_length\tc_hat\tgamma\tsubset_accuracy"
           "\tfailure_detection_rate";
    for (auto c : kAllLabels) out << "\tfn_" << label_name(c);
    for (auto c : kAllLabels) out << "\tfp_" << label_name(c);
    out << "\tn_frames\tconverged\tmax_kkt\tbest\n";
    for (const auto& row : result.rows) {
      const auto [nt, len] = shape(row.point.fft_stride);
      const auto& r = row.report;
      out << row.point.index << '\t' << kernel_name(result.grid.kernel) << '\t'
          << row.point.fft_stride << '\t' << nt << '\t' << len << '\t'
          << format_double(row.point.c_hat) << '\t' << format_double(row.point.gamma) << '\t'
          << format_double(r.subset_accuracy) << '\t' << format_double(r.failure_detection_rate);
      for (auto v : r.per_class_fn) out << '\t' << format_double(v);
      for (auto v : r.per_class_fp) out << '\t' << format_double(v);
      out << '\t' << r.n_frames << '\t' << (row.converged ? 1 : 0) << '\t'
          << format_double(row.max_kkt_violation) << '\t'
          << (row.point.index == result.best ? 1 : 0) << '\n';
    }
    return out.str();
  }
  const auto& best = result.rows[result.best];
  const auto [nt, len] = shape(best.point.fft_stride);
  char line[200];
  out << "Grid search: " << result.rows.size() << " combinations, kernel "
      << kernel_name(result.grid.kernel) << '\n';
  std::snprintf(line, sizeof(line),
                "Best: fft_stride %zu (n_t %zu, input size %zu), C_hat %.4g, gamma %.4g\n",
                best.point.fft_stride, nt, len, best.point.c_hat, best.point.gamma);
  out << line;
  std::size_t unconverged = 0;
  for (const auto& row : result.rows) unconverged += row.converged ? 0 : 1;
  if (unconverged > 0) out << "Non-converged combinations: " << unconverged << '\n';
  out << render_report(best.report, ReportFormat::Table);
  return out.str();
}

}  // namespace softfail
