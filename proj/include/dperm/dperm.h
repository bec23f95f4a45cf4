//
// Copyright 2026 The dperm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

/* C interface to the dperm library. Every call returns a dperm_status;
 * on failure dperm_last_error() describes the problem for the calling
 * thread. Strings returned through char** are owned by the caller and
 * released with dperm_string_free. Configuration is passed as JSON text. */

#ifndef DPERM_DPERM_H_
#define DPERM_DPERM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPERM_API __declspec(dllexport)
#elif defined(__GNUC__)
#define DPERM_API __attribute__((visibility("default")))
#else
#define DPERM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dperm_status {
  DPERM_OK = 0,
  DPERM_INVALID_ARGUMENT = 1,
  DPERM_PRECONDITION = 2,
  DPERM_NOT_CONVERGED = 3,
  DPERM_IO = 4,
  DPERM_PARSE = 5,
  DPERM_INTERNAL = 6
} dperm_status;

typedef struct dperm_dataset dperm_dataset;
typedef struct dperm_model dperm_model;
typedef struct dperm_result dperm_result;

DPERM_API const char* dperm_version(void);
DPERM_API const char* dperm_last_error(void);
DPERM_API const char* dperm_status_name(dperm_status status);
DPERM_API void dperm_string_free(char* s);

/* Datasets. */

/* Loads one or more delimited files described by a JSON schema file,
 * preprocesses them into the unit ball and optionally returns the
 * preprocessing report. */
DPERM_API dperm_status dperm_dataset_load_table(const char* const* paths,
                                                size_t path_count,
                                                const char* schema_path,
                                                dperm_dataset** out,
                                                char** report_json);
/* Text or binary vector files (the format is detected). */
DPERM_API dperm_status dperm_dataset_load(const char* path,
                                          dperm_dataset** out);
DPERM_API dperm_status dperm_dataset_save(const dperm_dataset* data,
                                          const char* path, int binary);
/* Keys: n, dimension, positive_fraction, separation, noise_std, seed. */
DPERM_API dperm_status dperm_dataset_synthetic(const char* config_json,
                                               dperm_dataset** out);
/* Rows, labels (+1/-1) and row-major features, all copied. */
DPERM_API dperm_status dperm_dataset_from_arrays(const double* features,
                                                 const double* labels,
                                                 size_t n, size_t dimension,
                                                 dperm_dataset** out);
DPERM_API dperm_status dperm_dataset_split(const dperm_dataset* data,
                                           double train_fraction,
                                           double validation_fraction,
                                           double test_fraction, uint64_t seed,
                                           dperm_dataset** train,
                                           dperm_dataset** validation,
                                           dperm_dataset** test);
DPERM_API size_t dperm_dataset_size(const dperm_dataset* data);
DPERM_API size_t dperm_dataset_dimension(const dperm_dataset* data);
/* Copies row `index` into features[0..dimension) and its label. */
DPERM_API dperm_status dperm_dataset_row(const dperm_dataset* data,
                                         size_t index, double* features,
                                         double* label);
DPERM_API void dperm_dataset_free(dperm_dataset* data);

/* Models. */

/* Keys: method ("nonprivate" | "output" | "objective"), loss, h, lambda,
 * epsilon, seed, grad_tol, max_iters, kernel {features, gamma, norm_mode}.
 * Tuning additionally reads "lambdas" (the candidate list). */
DPERM_API dperm_status dperm_model_train(const dperm_dataset* data,
                                         const char* config_json,
                                         dperm_model** out);
DPERM_API dperm_status dperm_model_tune(const dperm_dataset* data,
                                        const char* config_json,
                                        dperm_model** out);
DPERM_API dperm_status dperm_model_to_json(const dperm_model* model,
                                           char** json);
DPERM_API dperm_status dperm_model_from_json(const char* json,
                                             dperm_model** out);
DPERM_API dperm_status dperm_model_save(const dperm_model* model,
                                        const char* path);
DPERM_API dperm_status dperm_model_load(const char* path, dperm_model** out);
DPERM_API dperm_status dperm_model_predict(const dperm_model* model,
                                           const double* x, size_t dimension,
                                           double* score, int* label);
/* {"examples", "false_positives", "false_negatives", "error_rate"}. */
DPERM_API dperm_status dperm_model_evaluate(const dperm_model* model,
                                            const dperm_dataset* data,
                                            char** counts_json);
DPERM_API size_t dperm_model_dimension(const dperm_model* model);
DPERM_API void dperm_model_free(dperm_model* model);

/* Audits. */

/* JSON array of audit names. */
DPERM_API dperm_status dperm_audit_names(char** names_json);
DPERM_API dperm_status dperm_audit_run(const char* name,
                                       const char* config_json,
                                       char** report_json, int* passed);

/* Experiments. */

/* Keys: kind ("privacy-accuracy" | "learning-curve"), methods, losses
 * (names or {kind, h}), h, epsilons, lambdas, folds, repeats, seed, workers,
 * time_budget, grad_tol, max_iters, kernel, and for learning curves
 * n_schedule, validation_size, test_size. */
DPERM_API dperm_status dperm_experiment_run(const dperm_dataset* data,
                                            const char* config_json,
                                            dperm_result** out);
/* format is "csv" or "json". */
DPERM_API dperm_status dperm_result_format(const dperm_result* result,
                                           const char* format,
                                           int include_timing, char** text);
DPERM_API dperm_status dperm_result_write(const dperm_result* result,
                                          const char* path, const char* format,
                                          int include_timing);
/* JSON summary: per (method, loss, epsilon) mean error and record counts. */
DPERM_API dperm_status dperm_result_summary(const dperm_result* result,
                                            char** summary_json);
DPERM_API size_t dperm_result_count(const dperm_result* result);
DPERM_API int dperm_result_partial(const dperm_result* result);
DPERM_API void dperm_result_free(dperm_result* result);

#ifdef __cplusplus
}
#endif

#endif /* DPERM_DPERM_H_ */
