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

#include "softfail/softfail.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "softfail/dataset.hpp"
#include "softfail/eval.hpp"
#include "softfail/inspect.hpp"
#include "softfail/noise.hpp"
#include "softfail/preprocess.hpp"
#include "softfail/svm.hpp"
#include "softfail/synth.hpp"

struct sf_trace {
  std::shared_ptr<const softfail::NoiseTrace> trace;
};
struct sf_dataset {
  softfail::Dataset dataset;
};
struct sf_model {
  softfail::MultiClassSvm model;
};
struct sf_predictions {
  std::vector<softfail::FramePrediction> rows;
};
struct sf_tune_result {
  softfail::GridSearchResult result;
  softfail::PreprocessConfig base;
};

namespace {

using namespace softfail;

thread_local std::string g_last_error;

sf_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SF_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return SF_ERR_IO;
    case ErrorCode::Parse: return SF_ERR_PARSE;
    case ErrorCode::DimensionMismatch: return SF_ERR_DIMENSION;
    case ErrorCode::SingleClass: return SF_ERR_SINGLE_CLASS;
    case ErrorCode::Internal: return SF_ERR_INTERNAL;
  }
  return SF_ERR_INTERNAL;
}

template <typename F>
sf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SF_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

PreprocessConfig to_cpp(const sf_preprocess_config& c) {
  PreprocessConfig p;
  p.frame_size = c.frame_size;
  p.frame_stride = c.frame_stride;
  p.fft_size = c.fft_size;
  p.fft_stride = c.fft_stride;
  p.compression_factor = c.compression_factor;
  p.log_epsilon = c.log_epsilon;
  return p;
}

sf_preprocess_config to_c(const PreprocessConfig& p) {
  return {p.frame_size, p.frame_stride, p.fft_size, p.fft_stride, p.compression_factor,
          p.log_epsilon};
}

Kernel::Type to_cpp(sf_kernel k) {
  if (k == SF_KERNEL_LINEAR) return Kernel::Type::Linear;
  if (k == SF_KERNEL_RBF) return Kernel::Type::Rbf;
  fail(ErrorCode::InvalidArgument, "unknown kernel");
}

TrainOptions to_cpp(const sf_train_params& t) {
  TrainOptions o;
  o.kernel = to_cpp(t.kernel) == Kernel::Type::Rbf ? Kernel::rbf(t.gamma) : Kernel::linear();
  o.c_hat = t.c_hat;
  o.class_weight_factor = t.class_weight_factor;
  o.smo.tol = t.tol;
  o.smo.max_iter = t.max_iter;
  o.smo.cache_bytes = t.cache_bytes;
  o.jobs = t.jobs == 0 ? 1 : t.jobs;
  if (!(o.smo.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  return o;
}

sf_report to_c(const EvaluationReport& r) {
  sf_report out{};
  for (std::size_t t = 0; t < kNumLabels; ++t) {
    for (std::size_t p = 0; p < kNumLabels; ++p) out.confusion[t][p] = r.confusion[t][p];
    out.per_class_fn[t] = r.per_class_fn[t];
    out.per_class_fp[t] = r.per_class_fp[t];
  }
  out.n_frames = r.n_frames;
  out.failure_detection_rate = r.failure_detection_rate;
  out.subset_accuracy = r.subset_accuracy;
  return out;
}

EvaluationReport to_cpp(const sf_report& r) {
  Confusion c{};
  for (std::size_t t = 0; t < kNumLabels; ++t) {
    for (std::size_t p = 0; p < kNumLabels; ++p) c[t][p] = r.confusion[t][p];
  }
  return EvaluationReport::from_confusion(c);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ReportFormat to_cpp(sf_format f) {
  return f == SF_FORMAT_TSV ? ReportFormat::Tsv : ReportFormat::Table;
}

}  // namespace

extern "C" {

SF_API const char* sf_version(void) { return "0.1.0"; }

SF_API const char* sf_last_error(void) { return g_last_error.c_str(); }

SF_API const char* sf_label_name(sf_label label) {
  switch (label) {
    case SF_LABEL_OK: return "OK";
    case SF_LABEL_IMPACT: return "Impact";
    case SF_LABEL_HIGHACC: return "HighAcc";
    case SF_LABEL_OSCILLATIONS: return "Oscillations";
  }
  return "?";
}

SF_API void sf_set_warning_handler(void (*handler)(const char*, void*), void* user) {
  if (!handler) {
    set_warning_sink(nullptr);
    return;
  }
  set_warning_sink([handler, user](std::string_view msg) {
    const std::string s(msg);
    handler(s.c_str(), user);
  });
}

SF_API void sf_string_free(char* s) { std::free(s); }

SF_API void sf_preprocess_config_init(sf_preprocess_config* cfg) {
  if (cfg) *cfg = to_c(PreprocessConfig{});
}

SF_API void sf_train_params_init(sf_train_params* params) {
  if (!params) return;
  const TrainOptions d;
  params->kernel = SF_KERNEL_RBF;
  params->gamma = d.kernel.gamma;
  params->c_hat = d.c_hat;
  params->class_weight_factor = d.class_weight_factor;
  params->tol = d.smo.tol;
  params->max_iter = d.smo.max_iter;
  params->cache_bytes = d.smo.cache_bytes;
  params->jobs = 1;
}

SF_API sf_status sf_preprocess_shape(const sf_preprocess_config* cfg, size_t* n_transforms,
                                     size_t* feature_length) {
  return guarded([&] {
    require(cfg, "cfg");
    const auto p = to_cpp(*cfg);
    p.validate();
    if (n_transforms) *n_transforms = p.num_transforms();
    if (feature_length) *feature_length = p.feature_length();
  });
}

SF_API sf_status sf_estimate_noise(const char* trajectory_path, const char* actual_columns,
                                   const char* desired_columns, sf_trace** out) {
  return guarded([&] {
    require(trajectory_path, "trajectory_path");
    require(out, "out");
    ColumnSpec spec;
    if (actual_columns) spec.actual = ColumnSpec::parse_list(actual_columns);
    if (desired_columns) spec.desired = ColumnSpec::parse_list(desired_columns);
    const auto traj = read_trajectory(trajectory_path, spec);
    *out = new sf_trace{std::make_shared<const NoiseTrace>(estimate_noise(traj))};
  });
}

SF_API sf_status sf_trace_load(const char* path, sf_trace** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sf_trace{std::make_shared<const NoiseTrace>(read_trace(path))};
  });
}

SF_API sf_status sf_trace_save(const sf_trace* trace, const char* path) {
  return guarded([&] {
    require(trace, "trace");
    require(path, "path");
    save_trace(*trace->trace, path);
  });
}

SF_API size_t sf_trace_length(const sf_trace* trace) {
  return trace ? trace->trace->samples.size() : 0;
}

SF_API double sf_trace_sample_rate(const sf_trace* trace) {
  return trace ? trace->trace->sample_rate : 0.0;
}

SF_API const double* sf_trace_samples(const sf_trace* trace) {
  return trace ? trace->trace->samples.data() : nullptr;
}

SF_API void sf_trace_free(sf_trace* trace) { delete trace; }

SF_API sf_status sf_dataset_load(const char* noise_path, const char* annotation_path,
                                 sf_role role, sf_dataset** out) {
  return guarded([&] {
    require(noise_path, "noise_path");
    require(annotation_path, "annotation_path");
    require(out, "out");
    const auto r = role == SF_ROLE_VALIDATION ? DatasetRole::Validation : DatasetRole::Training;
    *out = new sf_dataset{load_dataset(noise_path, annotation_path, r)};
  });
}

SF_API size_t sf_dataset_block_count(const sf_dataset* ds) {
  return ds ? ds->dataset.blocks.size() : 0;
}

SF_API double sf_dataset_seconds(const sf_dataset* ds) {
  return ds ? ds->dataset.annotated_seconds() : 0.0;
}

SF_API sf_status sf_dataset_class_counts(const sf_dataset* ds, const sf_preprocess_config* cfg,
                                         uint64_t counts[SF_NUM_LABELS]) {
  return guarded([&] {
    require(ds, "ds");
    require(cfg, "cfg");
    require(counts, "counts");
    const auto p = to_cpp(*cfg);
    p.validate();
    const auto c = class_counts(ds->dataset, p);
    for (std::size_t k = 0; k < kNumLabels; ++k) counts[k] = c[k];
  });
}

SF_API void sf_dataset_free(sf_dataset* ds) { delete ds; }

SF_API sf_status sf_model_train(const sf_dataset* train, const sf_preprocess_config* cfg,
                                const sf_train_params* params, sf_model** out) {
  return guarded([&] {
    require(train, "train");
    require(cfg, "cfg");
    require(params, "params");
    require(out, "out");
    const auto p = to_cpp(*cfg);
    p.validate();
    const auto opts = to_cpp(*params);
    const auto fs = featurize(train->dataset, p, opts.jobs);
    *out = new sf_model{train_multiclass(fs, p, opts)};
  });
}

SF_API sf_status sf_model_load(const char* path, sf_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sf_model{load_model(path)};
  });
}

SF_API sf_status sf_model_save(const sf_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    save_model(model->model, path);
  });
}

SF_API sf_status sf_model_get_info(const sf_model* model, sf_model_info* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& m = model->model;
    sf_model_info info{};
    info.preprocess = to_c(m.preprocess);
    info.kernel = m.kernel.type == Kernel::Type::Rbf ? SF_KERNEL_RBF : SF_KERNEL_LINEAR;
    info.gamma = m.kernel.gamma;
    info.c_hat = m.c_hat;
    info.feature_length = m.feature_length;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const auto& b = m.machines[k];
      info.has_class[k] = b ? 1 : 0;
      info.class_c[k] = b ? b->c : 0.0;
      info.support_vectors[k] = b ? b->dual_coefs.size() : 0;
    }
    info.converged = m.converged() ? 1 : 0;
    info.max_kkt_violation = m.max_kkt_violation();
    *out = info;
  });
}

SF_API void sf_model_free(sf_model* model) { delete model; }

SF_API sf_status sf_model_evaluate(const sf_model* model, const sf_dataset* validation,
                                   const sf_preprocess_config* preprocess_override, size_t jobs,
                                   sf_report* out) {
  return guarded([&] {
    require(model, "model");
    require(validation, "validation");
    require(out, "out");
    PreprocessConfig override_cfg;
    if (preprocess_override) override_cfg = to_cpp(*preprocess_override);
    const auto r = evaluate(model->model, validation->dataset, jobs == 0 ? 1 : jobs,
                            preprocess_override ? &override_cfg : nullptr);
    *out = to_c(r);
  });
}

SF_API sf_status sf_report_render(const sf_report* report, sf_format format, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = dup_string(render_report(to_cpp(*report), to_cpp(format)));
  });
}

SF_API sf_status sf_model_predict_trace(const sf_model* model, const sf_trace* trace, size_t jobs,
                                        sf_predictions** out) {
  return guarded([&] {
    require(model, "model");
    require(trace, "trace");
    require(out, "out");
    *out = new sf_predictions{predict_trace(model->model, *trace->trace, jobs == 0 ? 1 : jobs)};
  });
}

SF_API size_t sf_predictions_count(const sf_predictions* p) { return p ? p->rows.size() : 0; }

SF_API sf_status sf_predictions_get(const sf_predictions* p, size_t index, sf_prediction* out) {
  return guarded([&] {
    require(p, "predictions");
    require(out, "out");
    if (index >= p->rows.size()) fail(ErrorCode::InvalidArgument, "prediction index out of range");
    const auto& r = p->rows[index];
    sf_prediction o{};
    o.t_start = r.t_start;
    o.t_end = r.t_end;
    o.label = static_cast<sf_label>(label_index(r.label));
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      o.has_decision[k] = r.values[k] ? 1 : 0;
      o.decision[k] = r.values[k].value_or(0.0);
    }
    o.padded = r.padded ? 1 : 0;
    *out = o;
  });
}

SF_API void sf_predictions_free(sf_predictions* p) { delete p; }

SF_API sf_status sf_tune(const sf_dataset* train, const sf_dataset* validation,
                         const sf_grid* grid, const sf_preprocess_config* base_cfg,
                         const sf_train_params* params, const char* journal_path,
                         sf_tune_result** out) {
  return guarded([&] {
    require(train, "train");
    require(validation, "validation");
    require(base_cfg, "base_cfg");
    require(params, "params");
    require(out, "out");
    const auto opts = to_cpp(*params);
    HyperGrid g;
    if (grid) {
      g.kernel = to_cpp(grid->kernel);
      if (grid->n_fft_strides) require(grid->fft_strides, "grid->fft_strides");
      if (grid->n_c_hats) require(grid->c_hats, "grid->c_hats");
      g.fft_strides.assign(grid->fft_strides, grid->fft_strides + grid->n_fft_strides);
      g.c_hats.assign(grid->c_hats, grid->c_hats + grid->n_c_hats);
      if (g.kernel == Kernel::Type::Rbf && grid->n_gammas) {
        require(grid->gammas, "grid->gammas");
        g.gammas.assign(grid->gammas, grid->gammas + grid->n_gammas);
      }
    } else {
      g = HyperGrid::defaults(opts.kernel.type);
    }
    GridSearchOptions gso;
    gso.jobs = opts.jobs;
    if (journal_path) gso.journal_path = journal_path;
    const auto base = to_cpp(*base_cfg);
    auto res = std::make_unique<sf_tune_result>();
    res->result = grid_search(train->dataset, validation->dataset, g, base, opts, gso);
    res->base = base;
    *out = res.release();
  });
}

SF_API size_t sf_tune_result_count(const sf_tune_result* r) {
  return r ? r->result.rows.size() : 0;
}

SF_API size_t sf_tune_result_best(const sf_tune_result* r) { return r ? r->result.best : 0; }

SF_API sf_status sf_tune_result_row(const sf_tune_result* r, size_t index, sf_tune_row* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (index >= r->result.rows.size()) fail(ErrorCode::InvalidArgument, "row index out of range");
    const auto& row = r->result.rows[index];
    sf_tune_row o{};
    o.index = row.point.index;
    o.fft_stride = row.point.fft_stride;
    o.c_hat = row.point.c_hat;
    o.gamma = row.point.gamma;
    o.converged = row.converged ? 1 : 0;
    o.max_kkt_violation = row.max_kkt_violation;
    o.report = to_c(row.report);
    *out = o;
  });
}

SF_API sf_status sf_tune_result_render(const sf_tune_result* r, sf_format format, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(render_grid(r->result, r->base, to_cpp(format)));
  });
}

SF_API void sf_tune_result_free(sf_tune_result* r) { delete r; }

SF_API sf_status sf_synth_generate(const char* scenario_path, const uint64_t* seed_override,
                                   const char* trace_out, const char* annotations_out) {
  return guarded([&] {
    require(scenario_path, "scenario_path");
    require(trace_out, "trace_out");
    require(annotations_out, "annotations_out");
    auto spec = read_scenario(scenario_path);
    if (seed_override) spec.seed = *seed_override;
    const auto out = generate(spec);
    save_trace(out.trace, trace_out);
    save_annotations(out.annotations, annotations_out);
  });
}

SF_API sf_status sf_inspect(const sf_trace* trace, size_t start_sample,
                            const sf_preprocess_config* cfg, const char* out_prefix) {
  return guarded([&] {
    require(trace, "trace");
    require(cfg, "cfg");
    require(out_prefix, "out_prefix");
    write_inspection(inspect_frame(*trace->trace, start_sample, to_cpp(*cfg)), out_prefix);
  });
}

}  // extern "C"
