// Copyright 2026 The qweather Authors
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

#include "qweather.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "qweather/error.hpp"
#include "qweather/pipeline.hpp"
#include "qweather/qsim.hpp"
#include "qweather/train.hpp"

using namespace qweather;

struct qwf_experiment {
  pipeline::ExperimentConfig cfg;
  pipeline::RunOptions opts;
  qwf_log_fn log_fn{nullptr};
  void* log_user{nullptr};
};

struct qwf_statevector {
  qsim::StateVector sv;
};

namespace {

thread_local std::string g_last_error;

qwf_status fail(qwf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
qwf_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QWF_OK;
  } catch (const Error& e) {
    return fail(static_cast<qwf_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QWF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QWF_ERR_INTERNAL, e.what());
  }
}

qwf_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  if (buf && cap < s.size() + 1) return fail(QWF_ERR_INVALID_ARGUMENT, "buffer too small");
  return QWF_OK;
}

#define QWF_REQUIRE(cond, msg) \
  if (!(cond)) return fail(QWF_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* qwf_version(void) { return "0.1.0"; }

const char* qwf_last_error(void) { return g_last_error.c_str(); }

qwf_status qwf_experiment_open(const char* config_path, qwf_experiment** out) {
  QWF_REQUIRE(config_path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto e = std::make_unique<qwf_experiment>();
    e->cfg = pipeline::ExperimentConfig::load(config_path);
    *out = e.release();
  });
}

void qwf_experiment_close(qwf_experiment* exp) { delete exp; }

qwf_status qwf_experiment_set_offline(qwf_experiment* exp, int offline) {
  QWF_REQUIRE(exp, "null experiment");
  exp->opts.offline = offline != 0;
  return QWF_OK;
}

qwf_status qwf_experiment_set_jobs(qwf_experiment* exp, int jobs) {
  QWF_REQUIRE(exp, "null experiment");
  QWF_REQUIRE(jobs >= 1, "jobs must be >= 1");
  exp->opts.jobs = jobs;
  return QWF_OK;
}

qwf_status qwf_experiment_set_seed_base(qwf_experiment* exp, uint64_t seed_base) {
  QWF_REQUIRE(exp, "null experiment");
  exp->opts.seed_base = seed_base;
  return QWF_OK;
}

qwf_status qwf_experiment_set_out_dir(qwf_experiment* exp, const char* dir) {
  QWF_REQUIRE(exp, "null experiment");
  if (dir && *dir) {
    exp->opts.out = dir;
  } else {
    exp->opts.out.reset();
  }
  return QWF_OK;
}

qwf_status qwf_experiment_set_cache_dir(qwf_experiment* exp, const char* dir) {
  QWF_REQUIRE(exp, "null experiment");
  if (dir && *dir) {
    exp->opts.cache_dir = dir;
  } else {
    exp->opts.cache_dir.reset();
  }
  return QWF_OK;
}

qwf_status qwf_experiment_set_log(qwf_experiment* exp, qwf_log_fn fn, void* user) {
  QWF_REQUIRE(exp, "null experiment");
  exp->log_fn = fn;
  exp->log_user = user;
  return QWF_OK;
}

qwf_status qwf_experiment_run(qwf_experiment* exp, qwf_stage stage) {
  QWF_REQUIRE(exp, "null experiment");
  return guarded([&] {
    auto opts = exp->opts;
    if (exp->log_fn) {
      opts.log = [fn = exp->log_fn, user = exp->log_user](const std::string& m) { fn(m.c_str(), user); };
    }
    const pipeline::Context ctx(exp->cfg, opts);
    switch (stage) {
      case QWF_STAGE_FETCH:
        pipeline::cmd_fetch(ctx);
        break;
      case QWF_STAGE_ANALYZE:
        pipeline::cmd_analyze(ctx);
        break;
      case QWF_STAGE_TRAIN:
        pipeline::cmd_train(ctx);
        break;
      case QWF_STAGE_REPORT:
        pipeline::cmd_report(ctx);
        break;
      case QWF_STAGE_ALL:
        pipeline::cmd_all(ctx);
        break;
      default:
        throw InvalidArgument("unknown stage " + std::to_string(static_cast<int>(stage)));
    }
  });
}

qwf_status qwf_experiment_out_dir(const qwf_experiment* exp, char* buf, size_t cap, size_t* needed) {
  QWF_REQUIRE(exp, "null experiment");
  std::string dir;
  const qwf_status s = guarded([&] { dir = pipeline::Context(exp->cfg, exp->opts).out.string(); });
  if (s != QWF_OK) return s;
  return copy_out(dir, buf, cap, needed);
}

qwf_status qwf_sv_create(int n_qubits, qwf_statevector** out) {
  QWF_REQUIRE(out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new qwf_statevector{qsim::StateVector(n_qubits)}; });
}

void qwf_sv_destroy(qwf_statevector* sv) { delete sv; }

qwf_status qwf_sv_n_qubits(const qwf_statevector* sv, int* out) {
  QWF_REQUIRE(sv && out, "null argument");
  *out = sv->sv.n_qubits();
  return QWF_OK;
}

qwf_status qwf_sv_apply_ry(qwf_statevector* sv, int qubit, double theta) {
  QWF_REQUIRE(sv, "null statevector");
  return guarded([&] { sv->sv.apply_ry(qubit, theta); });
}

qwf_status qwf_sv_apply_rz(qwf_statevector* sv, int qubit, double theta) {
  QWF_REQUIRE(sv, "null statevector");
  return guarded([&] { sv->sv.apply_rz(qubit, theta); });
}

qwf_status qwf_sv_apply_rot(qwf_statevector* sv, int qubit, double a, double b, double c) {
  QWF_REQUIRE(sv, "null statevector");
  return guarded([&] { sv->sv.apply_rot(qubit, a, b, c); });
}

qwf_status qwf_sv_apply_cnot(qwf_statevector* sv, int control, int target) {
  QWF_REQUIRE(sv, "null statevector");
  return guarded([&] { sv->sv.apply_cnot(control, target); });
}

qwf_status qwf_sv_expval_z(const qwf_statevector* sv, int qubit, double* out) {
  QWF_REQUIRE(sv && out, "null argument");
  return guarded([&] { *out = sv->sv.expval_z(qubit); });
}

qwf_status qwf_sv_amplitude(const qwf_statevector* sv, size_t index, double* re, double* im) {
  QWF_REQUIRE(sv && re && im, "null argument");
  QWF_REQUIRE(index < sv->sv.size(), "amplitude index out of range");
  const auto a = sv->sv.amplitudes()[index];
  *re = a.real();
  *im = a.imag();
  return QWF_OK;
}

qwf_status qwf_sv_dump_csv(const qwf_statevector* sv, char* buf, size_t cap, size_t* needed) {
  QWF_REQUIRE(sv, "null statevector");
  return copy_out(sv->sv.dump_csv(), buf, cap, needed);
}

double qwf_accuracy_pct(double mae) { return train::accuracy_pct(mae); }

}  // extern "C"
