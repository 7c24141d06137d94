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

/* C interface to the softfail library: opaque handles, status codes, and a
 * thread-local error message retrievable with sf_last_error(). Every handle
 * returned through an out-parameter is owned by the caller and released with
 * the matching sf_*_free(); free functions accept NULL. */
#ifndef SOFTFAIL_SOFTFAIL_H_
#define SOFTFAIL_SOFTFAIL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SOFTFAIL_BUILDING_LIBRARY)
#define SF_API __attribute__((visibility("default")))
#else
#define SF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_ARGUMENT = 1,
  SF_ERR_IO = 2,
  SF_ERR_PARSE = 3,
  SF_ERR_DIMENSION = 4,
  SF_ERR_SINGLE_CLASS = 5,
  SF_ERR_INTERNAL = 6
} sf_status;

#define SF_NUM_LABELS 4

/* Stable persisted codes. */
typedef enum sf_label {
  SF_LABEL_OK = 0,
  SF_LABEL_IMPACT = 1,
  SF_LABEL_HIGHACC = 2,
  SF_LABEL_OSCILLATIONS = 3
} sf_label;

typedef enum sf_role { SF_ROLE_TRAINING = 0, SF_ROLE_VALIDATION = 1 } sf_role;
typedef enum sf_kernel { SF_KERNEL_LINEAR = 0, SF_KERNEL_RBF = 1 } sf_kernel;
typedef enum sf_format { SF_FORMAT_TABLE = 0, SF_FORMAT_TSV = 1 } sf_format;

typedef struct sf_trace sf_trace;
typedef struct sf_dataset sf_dataset;
typedef struct sf_model sf_model;
typedef struct sf_predictions sf_predictions;
typedef struct sf_tune_result sf_tune_result;

typedef struct sf_preprocess_config {
  size_t frame_size;         /* samples per frame, default 4000 */
  size_t frame_stride;       /* default 1000 */
  size_t fft_size;           /* default 1024 */
  size_t fft_stride;         /* default 834 */
  size_t compression_factor; /* default 3 */
  double log_epsilon;        /* default 1e-10 */
} sf_preprocess_config;

typedef struct sf_train_params {
  sf_kernel kernel;           /* default SF_KERNEL_RBF */
  double gamma;               /* default 5.7e-4 */
  double c_hat;               /* default 1.1 */
  double class_weight_factor; /* default 0.25 */
  double tol;                 /* default 1e-3 */
  uint64_t max_iter;          /* default 1e7 */
  size_t cache_bytes;         /* default 256 MiB */
  size_t jobs;                /* default 1 */
} sf_train_params;

typedef struct sf_report {
  uint64_t confusion[SF_NUM_LABELS][SF_NUM_LABELS]; /* [true][predicted] */
  uint64_t n_frames;
  double per_class_fn[SF_NUM_LABELS];
  double per_class_fp[SF_NUM_LABELS];
  double failure_detection_rate;
  double subset_accuracy;
} sf_report;

typedef struct sf_model_info {
  sf_preprocess_config preprocess;
  sf_kernel kernel;
  double gamma;
  double c_hat;
  size_t feature_length;
  int has_class[SF_NUM_LABELS];
  double class_c[SF_NUM_LABELS];
  size_t support_vectors[SF_NUM_LABELS];
  int converged;
  double max_kkt_violation;
} sf_model_info;

typedef struct sf_prediction {
  double t_start;
  double t_end;
  sf_label label;
  int has_decision[SF_NUM_LABELS];
  double decision[SF_NUM_LABELS];
  int padded;
} sf_prediction;

typedef struct sf_grid {
  sf_kernel kernel;
  const size_t* fft_strides;
  size_t n_fft_strides;
  const double* c_hats;
  size_t n_c_hats;
  const double* gammas; /* ignored for the linear kernel */
  size_t n_gammas;
} sf_grid;

typedef struct sf_tune_row {
  size_t index;
  size_t fft_stride;
  double c_hat;
  double gamma;
  int converged;
  double max_kkt_violation;
  sf_report report;
} sf_tune_row;

SF_API const char* sf_version(void);
/* Message of the last failed call on this thread ("" if none). */
SF_API const char* sf_last_error(void);
SF_API const char* sf_label_name(sf_label label);
/* NULL restores the default (stderr). */
SF_API void sf_set_warning_handler(void (*handler)(const char* message, void* user), void* user);
SF_API void sf_string_free(char* s);

SF_API void sf_preprocess_config_init(sf_preprocess_config* cfg);
SF_API void sf_train_params_init(sf_train_params* params);
SF_API sf_status sf_preprocess_shape(const sf_preprocess_config* cfg, size_t* n_transforms,
                                     size_t* feature_length);

/* Noise estimation. Column selectors are comma-separated header names or
 * index ranges ("1-30"); NULL or "" for actual selects every column not
 * listed as desired. */
SF_API sf_status sf_estimate_noise(const char* trajectory_path, const char* actual_columns,
                                   const char* desired_columns, sf_trace** out);
SF_API sf_status sf_trace_load(const char* path, sf_trace** out);
SF_API sf_status sf_trace_save(const sf_trace* trace, const char* path);
SF_API size_t sf_trace_length(const sf_trace* trace);
SF_API double sf_trace_sample_rate(const sf_trace* trace);
SF_API const double* sf_trace_samples(const sf_trace* trace);
SF_API void sf_trace_free(sf_trace* trace);

SF_API sf_status sf_dataset_load(const char* noise_path, const char* annotation_path,
                                 sf_role role, sf_dataset** out);
SF_API size_t sf_dataset_block_count(const sf_dataset* ds);
SF_API double sf_dataset_seconds(const sf_dataset* ds);
SF_API sf_status sf_dataset_class_counts(const sf_dataset* ds, const sf_preprocess_config* cfg,
                                         uint64_t counts[SF_NUM_LABELS]);
SF_API void sf_dataset_free(sf_dataset* ds);

SF_API sf_status sf_model_train(const sf_dataset* train, const sf_preprocess_config* cfg,
                                const sf_train_params* params, sf_model** out);
SF_API sf_status sf_model_load(const char* path, sf_model** out);
SF_API sf_status sf_model_save(const sf_model* model, const char* path);
SF_API sf_status sf_model_get_info(const sf_model* model, sf_model_info* out);
SF_API void sf_model_free(sf_model* model);

/* preprocess_override may be NULL (use the model's configuration). */
SF_API sf_status sf_model_evaluate(const sf_model* model, const sf_dataset* validation,
                                   const sf_preprocess_config* preprocess_override, size_t jobs,
                                   sf_report* out);
SF_API sf_status sf_report_render(const sf_report* report, sf_format format, char** out);

SF_API sf_status sf_model_predict_trace(const sf_model* model, const sf_trace* trace, size_t jobs,
                                        sf_predictions** out);
SF_API size_t sf_predictions_count(const sf_predictions* p);
SF_API sf_status sf_predictions_get(const sf_predictions* p, size_t index, sf_prediction* out);
SF_API void sf_predictions_free(sf_predictions* p);

/* grid == NULL searches the default grid for params->kernel. journal_path
 * may be NULL; otherwise completed combinations found there are reused. */
SF_API sf_status sf_tune(const sf_dataset* train, const sf_dataset* validation,
                         const sf_grid* grid, const sf_preprocess_config* base_cfg,
                         const sf_train_params* params, const char* journal_path,
                         sf_tune_result** out);
SF_API size_t sf_tune_result_count(const sf_tune_result* r);
SF_API size_t sf_tune_result_best(const sf_tune_result* r);
SF_API sf_status sf_tune_result_row(const sf_tune_result* r, size_t index, sf_tune_row* out);
SF_API sf_status sf_tune_result_render(const sf_tune_result* r, sf_format format, char** out);
SF_API void sf_tune_result_free(sf_tune_result* r);

/* Writes the generated trace and annotations. seed_override may be NULL. */
SF_API sf_status sf_synth_generate(const char* scenario_path, const uint64_t* seed_override,
                                   const char* trace_out, const char* annotations_out);

/* Writes <out_prefix>{frame,spectrogram,compressed,dct}.tsv for the frame
 * starting at start_sample. */
SF_API sf_status sf_inspect(const sf_trace* trace, size_t start_sample,
                            const sf_preprocess_config* cfg, const char* out_prefix);

#ifdef __cplusplus
}
#endif

#endif /* SOFTFAIL_SOFTFAIL_H_ */
