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

// softfail command-line tool. Talks to the library exclusively through the
// C API in softfail/softfail.h.

#include <softfail/softfail.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

struct CliError {
  int code;
  std::string message;
};

void check(sf_status st) {
  if (st == SF_OK) return;
  throw CliError{st == SF_ERR_INTERNAL ? kExitInternal : kExitValidation, sf_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TracePtr = std::unique_ptr<sf_trace, Deleter<sf_trace, sf_trace_free>>;
using DatasetPtr = std::unique_ptr<sf_dataset, Deleter<sf_dataset, sf_dataset_free>>;
using ModelPtr = std::unique_ptr<sf_model, Deleter<sf_model, sf_model_free>>;
using PredictionsPtr = std::unique_ptr<sf_predictions, Deleter<sf_predictions, sf_predictions_free>>;
using TunePtr = std::unique_ptr<sf_tune_result, Deleter<sf_tune_result, sf_tune_result_free>>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  sf_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitValidation, "cannot write " + path};
  out << text;
}

DatasetPtr load_dataset(const std::string& noise, const std::string& annotations, sf_role role) {
  sf_dataset* ds = nullptr;
  check(sf_dataset_load(noise.c_str(), annotations.c_str(), role, &ds));
  return DatasetPtr(ds);
}

// Options shared by the subcommands that featurize or train.
struct Settings {
  sf_preprocess_config pre{};
  sf_train_params train{};
  std::string kernel = "rbf";
  std::optional<double> gamma;
  double cache_mb = 256.0;
  std::string format = "table";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;

  Settings() {
    sf_preprocess_config_init(&pre);
    sf_train_params_init(&train);
  }

  sf_format report_format() const { return format == "tsv" ? SF_FORMAT_TSV : SF_FORMAT_TABLE; }

  // Applies the kernel flags; a gamma given together with the linear kernel
  // is a conflict.
  void finalize_train() {
    train.kernel = kernel == "linear" ? SF_KERNEL_LINEAR : SF_KERNEL_RBF;
    if (gamma) {
      if (train.kernel == SF_KERNEL_LINEAR) {
        throw CliError{kExitValidation, "--gamma conflicts with --kernel linear"};
      }
      train.gamma = *gamma;
    }
    train.cache_bytes = static_cast<std::size_t>(cache_mb * 1024.0 * 1024.0);
    train.jobs = jobs;
  }
};

void add_preprocess_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--frame-size", s.pre.frame_size, "Samples per frame")->capture_default_str();
  cmd->add_option("--frame-stride", s.pre.frame_stride, "Frame stride in samples")->capture_default_str();
  cmd->add_option("--fft-size", s.pre.fft_size, "FFT length")->capture_default_str();
  cmd->add_option("--fft-stride", s.pre.fft_stride, "FFT window stride")->capture_default_str();
  cmd->add_option("--compression", s.pre.compression_factor, "Frequency bin compression factor")
      ->capture_default_str();
  cmd->add_option("--log-epsilon", s.pre.log_epsilon, "Offset added before the logarithm")
      ->capture_default_str();
}

void add_svm_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--kernel", s.kernel, "Kernel")->check(CLI::IsMember({"linear", "rbf"}))->capture_default_str();
  cmd->add_option("--gamma", s.gamma, "RBF kernel parameter (default 5.7e-4)");
  cmd->add_option("--c-hat", s.train.c_hat, "Global regularization")->capture_default_str();
  cmd->add_option("--class-weight-factor", s.train.class_weight_factor,
                  "Factor in C_cls = factor * N / N_cls * C_hat")->capture_default_str();
  cmd->add_option("--tol", s.train.tol, "SMO stopping tolerance")->capture_default_str();
  cmd->add_option("--max-iter", s.train.max_iter, "SMO pair-update limit")->capture_default_str();
  cmd->add_option("--cache-mb", s.cache_mb, "Kernel cache size in MiB")->capture_default_str();
}

void add_common_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("-j,--jobs", s.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--format", s.format, "Report rendering")
      ->check(CLI::IsMember({"table", "tsv"}))
      ->capture_default_str();
  cmd->add_flag("-q,--quiet", s.quiet, "Suppress warnings");
}

std::string label_counts_line(const uint64_t counts[SF_NUM_LABELS]) {
  std::string s;
  for (int k = 0; k < SF_NUM_LABELS; ++k) {
    if (k) s += ", ";
    s += sf_label_name(static_cast<sf_label>(k));
    s += " " + std::to_string(counts[k]);
  }
  return s;
}

std::string training_summary(const sf_model* model, const uint64_t counts[SF_NUM_LABELS],
                             sf_format format) {
  sf_model_info info{};
  check(sf_model_get_info(model, &info));
  std::string out;
  char line[200];
  if (format == SF_FORMAT_TSV) {
    out += "class\tframes\tc\tsupport_vectors\n";
    for (int k = 0; k < SF_NUM_LABELS; ++k) {
      if (!info.has_class[k]) continue;
      std::snprintf(line, sizeof(line), "%s\t%llu\t%.17g\t%zu\n", sf_label_name(static_cast<sf_label>(k)),
                    static_cast<unsigned long long>(counts[k]), info.class_c[k], info.support_vectors[k]);
      out += line;
    }
    std::snprintf(line, sizeof(line), "feature_length\t%zu\nconverged\t%d\nmax_kkt_violation\t%.17g\n",
                  info.feature_length, info.converged, info.max_kkt_violation);
    return out + line;
  }
  std::snprintf(line, sizeof(line), "Model: %s kernel", info.kernel == SF_KERNEL_RBF ? "rbf" : "linear");
  out += line;
  if (info.kernel == SF_KERNEL_RBF) {
    std::snprintf(line, sizeof(line), ", gamma %.6g", info.gamma);
    out += line;
  }
  std::snprintf(line, sizeof(line), ", C_hat %.6g, input size %zu\n", info.c_hat, info.feature_length);
  out += line;
  out += "Training frames: " + label_counts_line(counts) + "\n";
  for (int k = 0; k < SF_NUM_LABELS; ++k) {
    if (!info.has_class[k]) continue;
    std::snprintf(line, sizeof(line), "  %-14s C %-12.6g support vectors %zu\n",
                  sf_label_name(static_cast<sf_label>(k)), info.class_c[k], info.support_vectors[k]);
    out += line;
  }
  out += info.converged ? "Solver converged\n" : "WARNING: solver did not converge\n";
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softfail: soft-failure detection on robot noise estimates"};
  app.set_config("--config", "", "Configuration file (flags override it)");
  app.require_subcommand(1);
  Settings s;

  // estimate
  std::string traj_path, actual_cols, desired_cols, trace_out;
  auto* estimate = app.add_subcommand("estimate", "Noise trace from a joint-velocity log");
  estimate->add_option("trajectory", traj_path, "Tab-separated trajectory log")
      ->required()->check(CLI::ExistingFile);
  estimate->add_option("--actual", actual_cols, "Actual-velocity columns (names or ranges)");
  estimate->add_option("--desired", desired_cols, "Desired-velocity columns (names or ranges)");
  estimate->add_option("-o,--out", trace_out, "Output noise trace")->required();
  estimate->add_flag("-q,--quiet", s.quiet, "Suppress warnings");

  // train
  std::string noise_path, annotations_path, model_path;
  auto* train = app.add_subcommand("train", "Train a one-vs-rest SVM model");
  train->add_option("--noise", noise_path, "Training noise trace")->required()->check(CLI::ExistingFile);
  train->add_option("--annotations", annotations_path, "Training annotations")
      ->required()->check(CLI::ExistingFile);
  train->add_option("-o,--model", model_path, "Output model file")->required();
  add_preprocess_options(train, s);
  add_svm_options(train, s);
  add_common_options(train, s);

  // validate
  std::string tsv_out;
  std::optional<std::size_t> validate_fft_stride;
  auto* validate = app.add_subcommand("validate", "Evaluate a model on annotated data");
  validate->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  validate->add_option("--noise", noise_path, "Validation noise trace")->required()->check(CLI::ExistingFile);
  validate->add_option("--annotations", annotations_path, "Validation annotations")
      ->required()->check(CLI::ExistingFile);
  validate->add_option("--fft-stride", validate_fft_stride,
                       "Featurize with this FFT stride instead of the model's");
  validate->add_option("--tsv-out", tsv_out, "Also write the report as TSV");
  add_common_options(validate, s);

  // tune
  std::string train_noise, train_ann, val_noise, val_ann, journal, strides_arg, chats_arg, gammas_arg,
      best_model_out;
  auto* tune = app.add_subcommand("tune", "Grid search over FFT stride, C_hat and gamma");
  tune->add_option("--train-noise", train_noise)->required()->check(CLI::ExistingFile);
  tune->add_option("--train-annotations", train_ann)->required()->check(CLI::ExistingFile);
  tune->add_option("--val-noise", val_noise)->required()->check(CLI::ExistingFile);
  tune->add_option("--val-annotations", val_ann)->required()->check(CLI::ExistingFile);
  tune->add_option("--fft-strides", strides_arg, "Comma-separated FFT strides");
  tune->add_option("--c-hats", chats_arg, "Comma-separated C_hat values");
  tune->add_option("--gammas", gammas_arg, "Comma-separated gamma values (rbf)");
  tune->add_option("--journal", journal, "Journal of completed combinations (resumable)");
  tune->add_option("--tsv-out", tsv_out, "Write the full result table as TSV");
  tune->add_option("--model-out", best_model_out, "Train and save a model with the best parameters");
  add_preprocess_options(tune, s);
  add_svm_options(tune, s);
  add_common_options(tune, s);

  // predict
  auto* predict = app.add_subcommand("predict", "Label every frame of a noise trace");
  predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--noise", noise_path, "Noise trace")->required()->check(CLI::ExistingFile);
  add_common_options(predict, s);

  // synth
  std::string scenario_path, annotations_out;
  std::optional<uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic noise trace");
  synth->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Override the scenario seed");
  synth->add_option("--trace-out", trace_out, "Output noise trace")->required();
  synth->add_option("--annotations-out", annotations_out, "Output annotations")->required();
  synth->add_flag("-q,--quiet", s.quiet, "Suppress warnings");

  // inspect
  std::size_t start_sample = 0;
  std::string out_prefix;
  auto* inspect = app.add_subcommand("inspect", "Dump the pipeline tensors of one frame as TSV");
  inspect->add_option("--noise", noise_path, "Noise trace")->required()->check(CLI::ExistingFile);
  inspect->add_option("--start-sample", start_sample, "First sample of the frame")->capture_default_str();
  inspect->add_option("--out-prefix", out_prefix, "Prefix for the TSV files")->required();
  add_preprocess_options(inspect, s);
  inspect->add_flag("-q,--quiet", s.quiet, "Suppress warnings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (s.quiet) {
    sf_set_warning_handler([](const char*, void*) {}, nullptr);
  }

  try {
    if (*estimate) {
      sf_trace* t = nullptr;
      check(sf_estimate_noise(traj_path.c_str(), actual_cols.c_str(), desired_cols.c_str(), &t));
      TracePtr trace(t);
      check(sf_trace_save(trace.get(), trace_out.c_str()));
      std::fprintf(stderr, "wrote %zu samples at %.6g Hz to %s\n", sf_trace_length(trace.get()),
                   sf_trace_sample_rate(trace.get()), trace_out.c_str());
    } else if (*train) {
      s.finalize_train();
      auto ds = load_dataset(noise_path, annotations_path, SF_ROLE_TRAINING);
      uint64_t counts[SF_NUM_LABELS];
      check(sf_dataset_class_counts(ds.get(), &s.pre, counts));
      sf_model* m = nullptr;
      check(sf_model_train(ds.get(), &s.pre, &s.train, &m));
      ModelPtr model(m);
      check(sf_model_save(model.get(), model_path.c_str()));
      std::cout << training_summary(model.get(), counts, s.report_format());
    } else if (*validate) {
      sf_model* m = nullptr;
      check(sf_model_load(model_path.c_str(), &m));
      ModelPtr model(m);
      auto ds = load_dataset(noise_path, annotations_path, SF_ROLE_VALIDATION);
      sf_preprocess_config override_cfg{};
      const sf_preprocess_config* override_ptr = nullptr;
      if (validate_fft_stride) {
        sf_model_info info{};
        check(sf_model_get_info(model.get(), &info));
        override_cfg = info.preprocess;
        override_cfg.fft_stride = *validate_fft_stride;
        override_ptr = &override_cfg;
      }
      sf_report report{};
      check(sf_model_evaluate(model.get(), ds.get(), override_ptr, s.jobs, &report));
      char* text = nullptr;
      check(sf_report_render(&report, s.report_format(), &text));
      std::cout << take_string(text);
      if (!tsv_out.empty()) {
        check(sf_report_render(&report, SF_FORMAT_TSV, &text));
        write_file(tsv_out, take_string(text));
      }
    } else if (*tune) {
      s.finalize_train();
      auto tr = load_dataset(train_noise, train_ann, SF_ROLE_TRAINING);
      auto va = load_dataset(val_noise, val_ann, SF_ROLE_VALIDATION);
      std::vector<std::size_t> strides;
      std::vector<double> chats, gammas;
      const bool custom = !strides_arg.empty() || !chats_arg.empty() || !gammas_arg.empty();
      sf_grid grid{};
      if (custom) {
        // Unspecified axes fall back to the defaults.
        const std::vector<std::size_t> default_strides = {201, 401, 601, 834, 1200};
        std::vector<double> default_c, default_g;
        for (int i = 0; i < 9; ++i) default_c.push_back(std::pow(10.0, -2.0 + 0.5 * i));
        for (int i = 0; i < 9; ++i) default_g.push_back(std::pow(10.0, -5.0 + 0.5 * i));
        try {
          for (const auto& v : split_list(strides_arg)) if (!v.empty()) strides.push_back(std::stoull(v));
          for (const auto& v : split_list(chats_arg)) if (!v.empty()) chats.push_back(std::stod(v));
          for (const auto& v : split_list(gammas_arg)) if (!v.empty()) gammas.push_back(std::stod(v));
        } catch (const std::exception&) {
          throw CliError{kExitValidation, "invalid number in grid list"};
        }
        if (strides.empty()) strides = default_strides;
        if (chats.empty()) chats = default_c;
        if (gammas.empty()) gammas = default_g;
        if (s.train.kernel == SF_KERNEL_LINEAR && !gammas_arg.empty()) {
          throw CliError{kExitValidation, "--gammas conflicts with --kernel linear"};
        }
        grid = {s.train.kernel, strides.data(), strides.size(), chats.data(), chats.size(),
                gammas.data(), gammas.size()};
      }
      sf_tune_result* r = nullptr;
      check(sf_tune(tr.get(), va.get(), custom ? &grid : nullptr, &s.pre, &s.train,
                    journal.empty() ? nullptr : journal.c_str(), &r));
      TunePtr result(r);
      char* text = nullptr;
      check(sf_tune_result_render(result.get(), s.report_format(), &text));
      std::cout << take_string(text);
      if (!tsv_out.empty()) {
        check(sf_tune_result_render(result.get(), SF_FORMAT_TSV, &text));
        write_file(tsv_out, take_string(text));
      }
      if (!best_model_out.empty()) {
        sf_tune_row best{};
        check(sf_tune_result_row(result.get(), sf_tune_result_best(result.get()), &best));
        sf_preprocess_config cfg = s.pre;
        cfg.fft_stride = best.fft_stride;
        sf_train_params p = s.train;
        p.c_hat = best.c_hat;
        if (p.kernel == SF_KERNEL_RBF) p.gamma = best.gamma;
        sf_model* m = nullptr;
        check(sf_model_train(tr.get(), &cfg, &p, &m));
        ModelPtr model(m);
        check(sf_model_save(model.get(), best_model_out.c_str()));
      }
    } else if (*predict) {
      sf_model* m = nullptr;
      check(sf_model_load(model_path.c_str(), &m));
      ModelPtr model(m);
      sf_trace* t = nullptr;
      check(sf_trace_load(noise_path.c_str(), &t));
      TracePtr trace(t);
      sf_predictions* p = nullptr;
      check(sf_model_predict_trace(model.get(), trace.get(), s.jobs, &p));
      PredictionsPtr preds(p);
      const bool tsv = s.report_format() == SF_FORMAT_TSV;
      std::cout << (tsv ? "t_start\tt_end\tlabel\n" : "  t_start     t_end  label\n");
      for (std::size_t i = 0; i < sf_predictions_count(preds.get()); ++i) {
        sf_prediction row{};
        check(sf_predictions_get(preds.get(), i, &row));
        char line[128];
        std::snprintf(line, sizeof(line), tsv ? "%.6f\t%.6f\t%s%s\n" : "%9.4f %9.4f  %s%s\n", row.t_start,
                      row.t_end, sf_label_name(row.label), row.padded && !tsv ? " (padded)" : "");
        std::cout << line;
      }
    } else if (*synth) {
      check(sf_synth_generate(scenario_path.c_str(), seed ? &*seed : nullptr, trace_out.c_str(),
                              annotations_out.c_str()));
    } else if (*inspect) {
      sf_trace* t = nullptr;
      check(sf_trace_load(noise_path.c_str(), &t));
      TracePtr trace(t);
      check(sf_inspect(trace.get(), start_sample, &s.pre, out_prefix.c_str()));
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
