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

// Acceptance checks. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero if any check fails.
//
// The real-robot reproduction check runs only when SOFTFAIL_ROBOT_DATA names a
// directory holding train.trace, train.ann, val.trace and val.ann.

#include <softfail/eval.hpp>
#include <softfail/fft.hpp>
#include <softfail/synth.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "synthetic_corpus.hpp"

using namespace softfail;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

int failures = 0;

void run(const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Outcome::Fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.kind != Outcome::Skip && secs > budget_s) {
    o.kind = Outcome::Fail;
    o.detail += " (over the " + format_double(budget_s) + " s budget)";
  }
  const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Skip ? "SKIP" : "FAIL";
  if (o.kind == Outcome::Fail) ++failures;
  std::printf("%s  %-28s %7.2f s  %s\n", tag, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Outcome::Pass : Outcome::Fail, detail}; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

Dataset synthetic(double seconds, std::uint64_t seed, DatasetRole role) {
  auto out = generate(testing::benchmark_scenario(seconds, seed));
  return make_dataset(std::make_shared<NoiseTrace>(std::move(out.trace)), out.annotations, role);
}

Outcome shapes() {
  std::string detail;
  bool ok = true;
  for (auto [stride, nt, len] : {std::tuple<std::size_t, std::size_t, std::size_t>{401, 8, 1368}, {834, 4, 684}}) {
    PreprocessConfig cfg;
    cfg.fft_stride = stride;
    const auto v = FeatureExtractor(cfg).extract(std::vector<double>(4000, 1.0));
    ok = ok && cfg.num_transforms() == nt && cfg.feature_length() == len && v.size() == len;
    detail += "s_fft=" + std::to_string(stride) + ": n_t=" + std::to_string(cfg.num_transforms()) +
              " len=" + std::to_string(v.size()) + "; ";
  }
  return verdict(ok, detail);
}

Outcome dct_oracle() {
  double ortho = 0.0, direct = 0.0;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (std::size_t n : {1, 2, 3, 4, 8, 16, 64}) {
    const auto t = dct_matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += t(i, k) * t(j, k);
        ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(n);
      Matrix col(n, 1);
      for (std::size_t i = 0; i < n; ++i) col(i, 0) = x[i] = u(gen);
      const auto got = dct_rows(col);
      const auto want = oracle::dct2(x);
      for (std::size_t k = 0; k < n; ++k) direct = std::max(direct, std::abs(got(k, 0) - want[k]));
    }
  }
  return verdict(ortho < 1e-9 && direct <= 1e-12,
                 "max |T T^T - I| = " + sci(ortho) + ", max direct-sum error = " + sci(direct) +
                     " on inputs in [-10, 10]");
}

Outcome fft_oracle() {
  FftPlan plan(1024);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, parseval = 0.0;
  for (int f = 0; f < 100; ++f) {
    std::vector<double> x(1024);
    for (auto& v : x) v = u(gen);
    const auto fast = real_magnitudes(plan, x);
    const auto slow = oracle::dft_magnitudes(x);
    for (std::size_t k = 0; k < fast.size(); ++k) {
      worst = std::max(worst, std::abs(fast[k] - slow[k]) / slow[k]);
    }
    double e = 0.0;
    for (double v : x) e += v * v;
    parseval = std::max(parseval, std::abs(oracle::energy_from_half_spectrum(fast, 1024) - 1024.0 * e) /
                                      (1024.0 * e));
  }
  return verdict(worst <= 1e-6 && parseval <= 1e-6,
                 "max per-bin relative error " + sci(worst) + ", Parseval relative error " + sci(parseval));
}

// Solver stopping tolerance for the objective comparison. At the default
// 1e-3 the first-order stopping rule leaves objective gaps of a few 1e-6 on
// these problems, so the default-tolerance gap is reported alongside.
constexpr double kOracleTol = 1e-5;

Outcome qp_oracle() {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g(0.0, 1.0);
  double obj = 0.0, obj_default = 0.0, kkt = 0.0, eq = 0.0;
  int unconverged = 0;
  for (int p = 0; p < 50; ++p) {
    const std::size_t m = 2 + gen() % 11;
    const std::size_t dim = 1 + gen() % 3;
    const double c = std::array{0.1, 1.0, 10.0}[p % 3];
    const Kernel k = p % 2 ? Kernel::rbf(0.5) : Kernel::linear();
    Matrix x(m, dim);
    std::vector<int> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = i == 0 ? 1 : i == 1 ? -1 : (gen() % 2 ? 1 : -1);
      for (std::size_t d = 0; d < dim; ++d) x(i, d) = g(gen) + 0.5 * y[i];
    }
    std::vector<double> gram(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) gram[i * m + j] = k(x.row(i), x.row(j));
    }
    const auto ref = oracle::solve_qp(gram, y, c, 1e-10);
    DenseKernelMatrix km = DenseKernelMatrix::compute(x, k);
    const auto loose = solve_dual(km, y, c);
    obj_default = std::max(obj_default, std::abs(loose.objective - ref.objective));
    SmoOptions opts;
    opts.tol = kOracleTol;
    const auto tight = solve_dual(km, y, c, opts);
    obj = std::max(obj, std::abs(tight.objective - ref.objective));
    // Feasibility and KKT hold for both solutions.
    for (const DualSolution* sol : {&loose, &tight}) {
      unconverged += !sol->converged;
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        s += y[i] * sol->alpha[i];
        double f = sol->bias;
        for (std::size_t j = 0; j < m; ++j) f += sol->alpha[j] * y[j] * gram[j * m + i];
        const double yf = y[i] * f;
        const double a = sol->alpha[i];
        kkt = std::max(kkt, a <= 0.0 ? 1.0 - yf : a >= c ? yf - 1.0 : std::abs(yf - 1.0));
      }
      eq = std::max(eq, std::abs(s));
    }
  }
  return verdict(obj <= 1e-6 && kkt <= 1e-3 && eq <= 1e-8 && unconverged == 0,
                 "max |objective gap| " + sci(obj) + " at SMO tol " + sci(kOracleTol) + " (" +
                     sci(obj_default) + " at the default 1e-3), max KKT violation " + sci(kkt) +
                     ", max |sum y alpha| " + sci(eq));
}

Outcome analytic() {
  Matrix x(2, 1);
  x(0, 0) = -1.0;
  x(1, 0) = 1.0;
  const std::vector<int> y = {-1, 1};
  DenseKernelMatrix km = DenseKernelMatrix::compute(x, Kernel::linear());
  const auto sol = solve_dual(km, y, 10.0);
  const double err = std::max({std::abs(sol.alpha[0] - 0.5), std::abs(sol.alpha[1] - 0.5), std::abs(sol.bias)});
  return verdict(err <= 1e-6, "alpha = (" + format_double(sol.alpha[0]) + ", " + format_double(sol.alpha[1]) +
                                  "), b = " + format_double(sol.bias));
}

Outcome end_to_end() {
  const auto train = synthetic(60.0, 2026, DatasetRole::Training);
  const auto val = synthetic(30.0, 2027, DatasetRole::Validation);
  const PreprocessConfig cfg;
  for (const auto* ds : {&train, &val}) {
    const auto counts = class_counts(*ds, cfg);
    for (auto c : counts) {
      if (c == 0) return {Outcome::Fail, "synthetic corpus is missing a class"};
    }
  }
  const auto grid = HyperGrid::defaults(Kernel::Type::Rbf);
  const auto result = grid_search(train, val, grid, cfg, TrainOptions{}, {jobs(), ""});
  const auto& best = result.rows[result.best];
  const auto& r = best.report;
  return verdict(r.subset_accuracy >= 0.85 && r.failure_detection_rate >= 0.90,
                 "best of " + std::to_string(result.rows.size()) + " points (s_fft=" +
                     std::to_string(best.point.fft_stride) + ", C_hat=" + sci(best.point.c_hat) +
                     ", gamma=" + sci(best.point.gamma) + "): subset accuracy " +
                     format_double(r.subset_accuracy) + ", detection " +
                     format_double(r.failure_detection_rate) + " on " + std::to_string(r.n_frames) +
                     " validation frames");
}

Outcome robot_reproduction() {
  const char* dir = std::getenv("SOFTFAIL_ROBOT_DATA");
  if (!dir || !*dir) {
    return {Outcome::Skip, "not applicable: the published robot dataset is not available here "
                           "(set SOFTFAIL_ROBOT_DATA to run it)"};
  }
  const std::filesystem::path d(dir);
  const auto train = load_dataset((d / "train.trace").string(), (d / "train.ann").string(), DatasetRole::Training);
  const auto val = load_dataset((d / "val.trace").string(), (d / "val.ann").string(), DatasetRole::Validation);
  PreprocessConfig cfg;
  cfg.fft_stride = 834;
  TrainOptions opts;
  opts.kernel = Kernel::rbf(5.7e-4);
  opts.c_hat = 1.1;
  opts.jobs = jobs();
  const auto model = train_multiclass(featurize(train, cfg, jobs()), cfg, opts);
  const auto r = evaluate(model, val, jobs());
  return verdict(std::abs(r.subset_accuracy - 0.906) <= 0.03 && std::abs(r.failure_detection_rate - 0.979) <= 0.02,
                 "subset accuracy " + format_double(r.subset_accuracy) + " (target 0.906 +- 0.03), detection " +
                     format_double(r.failure_detection_rate) + " (target 0.979 +- 0.02)");
}

// One complete train + tune + evaluate pass; returns every artifact as text.
std::string full_run(std::size_t n_jobs) {
  const auto train = synthetic(30.0, 77, DatasetRole::Training);
  const auto val = synthetic(20.0, 78, DatasetRole::Validation);
  const PreprocessConfig cfg;
  std::ostringstream out;

  const auto model = train_multiclass(featurize(train, cfg, n_jobs), cfg, TrainOptions{.jobs = n_jobs});
  write_model(model, out);
  out << render_report(evaluate(model, val, n_jobs), ReportFormat::Tsv);

  auto grid = HyperGrid::defaults(Kernel::Type::Rbf);
  grid.fft_strides = {401, 834};
  const auto tuned = grid_search(train, val, grid, cfg, TrainOptions{}, {n_jobs, ""});
  out << render_grid(tuned, cfg, ReportFormat::Tsv);
  const auto& best = tuned.rows[tuned.best].point;
  PreprocessConfig best_cfg = cfg;
  best_cfg.fft_stride = best.fft_stride;
  TrainOptions best_opts{.kernel = Kernel::rbf(best.gamma), .c_hat = best.c_hat, .jobs = n_jobs};
  const auto best_model = train_multiclass(featurize(train, best_cfg, n_jobs), best_cfg, best_opts);
  write_model(best_model, out);
  out << render_report(evaluate(best_model, val, n_jobs), ReportFormat::Table);
  return out.str();
}

Outcome determinism() {
  const auto a = full_run(1);
  const auto b = full_run(jobs() + 2);
  return verdict(a == b, std::to_string(a.size()) + " bytes of models and reports, " +
                             (a == b ? "byte-identical" : "DIFFERENT") + " across runs (jobs 1 vs " +
                             std::to_string(jobs() + 2) + ")");
}

Outcome metric_algebra() {
  std::mt19937_64 gen(4);
  int bad_int = 0, bad_float = 0;
  for (int i = 0; i < 1000; ++i) {
    Confusion cm{};
    const std::uint64_t scale = 1 + gen() % 1000;
    for (auto& row : cm) {
      for (auto& v : row) v = gen() % scale;
    }
    cm[gen() % 4][gen() % 4] += 1;
    const auto r = EvaluationReport::from_confusion(cm);
    std::uint64_t fn = 0;
    double fn_rate = 0.0;
    for (auto c : kAllLabels) {
      fn += r.fn_count(c);
      fn_rate += r.per_class_fn[label_index(c)];
    }
    bad_int += r.correct() != r.n_frames - fn;
    bad_float += std::abs(r.subset_accuracy - (1.0 - fn_rate)) > 1e-12;
  }
  return verdict(bad_int == 0 && bad_float == 0,
                 "1000 matrices: " + std::to_string(bad_int) + " integer mismatches, " +
                     std::to_string(bad_float) + " beyond 1e-12 in floating point");
}

}  // namespace

int main() {
  set_warning_sink([](std::string_view) {});
  run("shape-reproduction", 1.0, shapes);
  run("dct-oracle", 1.0, dct_oracle);
  run("fft-oracle", 10.0, fft_oracle);
  run("qp-oracle", 30.0, qp_oracle);
  run("analytic-svm", 1.0, analytic);
  run("end-to-end-synthetic", 300.0, end_to_end);
  run("robot-dataset-reproduction", 1e9, robot_reproduction);
  run("determinism", 300.0, determinism);
  run("metric-algebra", 1.0, metric_algebra);
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria met" : "acceptance: FAILED");
  return failures == 0 ? 0 : 1;
}
