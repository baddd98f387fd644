/*
 * Copyright 2026 The qweather Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libqweather.
 *
 * Every function returns a qwf_status. On failure, qwf_last_error() returns a
 * message for the calling thread, valid until that thread's next call.
 * Handles are opaque and must be released with the matching *_close/_destroy.
 */
#ifndef QWEATHER_H_
#define QWEATHER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QWF_API __declspec(dllexport)
#else
#define QWF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values of the first four match the command-line exit codes. */
typedef enum {
  QWF_OK = 0,
  QWF_ERR_CONFIG = 2,
  QWF_ERR_DATA = 3,
  QWF_ERR_TRAINING = 4,
  QWF_ERR_REPORT = 5,
  QWF_ERR_INVALID_ARGUMENT = 6,
  QWF_ERR_IO = 7,
  QWF_ERR_INTERNAL = 8
} qwf_status;

typedef enum {
  QWF_STAGE_FETCH = 0,
  QWF_STAGE_ANALYZE = 1,
  QWF_STAGE_TRAIN = 2,
  QWF_STAGE_REPORT = 3,
  QWF_STAGE_ALL = 4
} qwf_stage;

typedef struct qwf_experiment qwf_experiment;
typedef struct qwf_statevector qwf_statevector;

typedef void (*qwf_log_fn)(const char* message, void* user);

QWF_API const char* qwf_version(void);
QWF_API const char* qwf_last_error(void);

/* --- experiments ---------------------------------------------------------- */

QWF_API qwf_status qwf_experiment_open(const char* config_path, qwf_experiment** out);
QWF_API void qwf_experiment_close(qwf_experiment* exp);

QWF_API qwf_status qwf_experiment_set_offline(qwf_experiment* exp, int offline);
QWF_API qwf_status qwf_experiment_set_jobs(qwf_experiment* exp, int jobs);
QWF_API qwf_status qwf_experiment_set_seed_base(qwf_experiment* exp, uint64_t seed_base);
QWF_API qwf_status qwf_experiment_set_out_dir(qwf_experiment* exp, const char* dir);
QWF_API qwf_status qwf_experiment_set_cache_dir(qwf_experiment* exp, const char* dir);
QWF_API qwf_status qwf_experiment_set_log(qwf_experiment* exp, qwf_log_fn fn, void* user);

QWF_API qwf_status qwf_experiment_run(qwf_experiment* exp, qwf_stage stage);

/* Effective output directory. Copies at most cap bytes including the NUL;
 * *needed receives the full length + 1. */
QWF_API qwf_status qwf_experiment_out_dir(const qwf_experiment* exp, char* buf, size_t cap, size_t* needed);

/* --- statevector ---------------------------------------------------------- */

/* |0...0> on n qubits, 1 <= n <= 24. Qubit 0 is the most significant bit. */
QWF_API qwf_status qwf_sv_create(int n_qubits, qwf_statevector** out);
QWF_API void qwf_sv_destroy(qwf_statevector* sv);

QWF_API qwf_status qwf_sv_n_qubits(const qwf_statevector* sv, int* out);
QWF_API qwf_status qwf_sv_apply_ry(qwf_statevector* sv, int qubit, double theta);
QWF_API qwf_status qwf_sv_apply_rz(qwf_statevector* sv, int qubit, double theta);
/* RZ(c) RY(b) RZ(a). */
QWF_API qwf_status qwf_sv_apply_rot(qwf_statevector* sv, int qubit, double a, double b, double c);
QWF_API qwf_status qwf_sv_apply_cnot(qwf_statevector* sv, int control, int target);
QWF_API qwf_status qwf_sv_expval_z(const qwf_statevector* sv, int qubit, double* out);
QWF_API qwf_status qwf_sv_amplitude(const qwf_statevector* sv, size_t index, double* re, double* im);
/* `index,re,im` rows, same buffer contract as qwf_experiment_out_dir. */
QWF_API qwf_status qwf_sv_dump_csv(const qwf_statevector* sv, char* buf, size_t cap, size_t* needed);

/* --- metrics -------------------------------------------------------------- */

QWF_API double qwf_accuracy_pct(double mae);

#ifdef __cplusplus
}
#endif

#endif /* QWEATHER_H_ */
