#include "rsos/rsos.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/dual.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/lattice.hpp"
#include "core/minpath.hpp"
#include "core/surface.hpp"

struct rsos_config {
  rsos::ExperimentConfig config;
};

struct rsos_result {
  rsos::ExperimentResult result;
  std::vector<std::string> csv;
  std::string manifest;
};

struct rsos_lattice {
  rsos::EventSet set;
};

struct rsos_dual {
  rsos::DualTrajectory traj;
};

namespace {

thread_local std::string last_error;

rsos_status to_status(rsos::ErrorCode code) {
  return static_cast<rsos_status>(static_cast<int>(code));
}

template <typename Fn>
rsos_status guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return RSOS_OK;
  } catch (const rsos::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RSOS_ERR_RESOURCE_LIMIT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RSOS_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) rsos::fail(rsos::ErrorCode::invalid_argument, std::string("null argument: ") + what);
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path);
  if (!out) rsos::fail(rsos::ErrorCode::io, std::string("cannot open ") + path + " for writing");
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  if (!out) rsos::fail(rsos::ErrorCode::io, std::string("failed writing ") + path);
}

}  // namespace

extern "C" {

const char* rsos_version(void) { return RSOS_VERSION_STRING; }

const char* rsos_status_name(rsos_status status) {
  if (status == RSOS_OK) return "ok";
  if (status == RSOS_ERR_INTERNAL) return "internal";
  if (status < RSOS_OK || status > RSOS_ERR_INTERNAL) return "unknown";
  return rsos::to_string(static_cast<rsos::ErrorCode>(status));
}

const char* rsos_last_error(void) { return last_error.c_str(); }

rsos_status rsos_config_new(const char* experiment, rsos_config** out) {
  return guard([&] {
    require(experiment && out, "experiment/out");
    auto c = std::make_unique<rsos_config>();
    rsos::set_config_value(c->config, "experiment", experiment);
    *out = c.release();
  });
}

rsos_status rsos_config_load(const char* path, rsos_config** out) {
  return guard([&] {
    require(path && out, "path/out");
    auto c = std::make_unique<rsos_config>();
    c->config = rsos::load_config(path);
    *out = c.release();
  });
}

rsos_status rsos_config_set(rsos_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config && key && value, "config/key/value");
    rsos::set_config_value(config->config, key, value);
  });
}

void rsos_config_free(rsos_config* config) { delete config; }

rsos_status rsos_run(const rsos_config* config, int write_outputs, rsos_result** out) {
  return guard([&] {
    require(config && out, "config/out");
    auto r = std::make_unique<rsos_result>();
    if (write_outputs) {
      r->manifest = rsos::run_and_write(config->config, r->result).path.string();
    } else {
      r->result = rsos::run_experiment(config->config);
    }
    for (const auto& [name, table] : r->result.tables) {
      std::ostringstream os;
      rsos::write_csv(os, table);
      r->csv.push_back(os.str());
    }
    *out = r.release();
  });
}

int rsos_result_passed(const rsos_result* result) { return result && result->result.passed() ? 1 : 0; }

size_t rsos_result_check_count(const rsos_result* result) { return result ? result->result.checks.size() : 0; }

rsos_status rsos_result_check(const rsos_result* result, size_t index, const char** name, int* passed,
                              const char** detail) {
  return guard([&] {
    require(result, "result");
    if (index >= result->result.checks.size()) rsos::fail(rsos::ErrorCode::not_found, "check index out of range");
    const auto& c = result->result.checks[index];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
  });
}

size_t rsos_result_table_count(const rsos_result* result) { return result ? result->result.tables.size() : 0; }

rsos_status rsos_result_table(const rsos_result* result, size_t index, const char** name, const char** csv) {
  return guard([&] {
    require(result, "result");
    if (index >= result->result.tables.size()) rsos::fail(rsos::ErrorCode::not_found, "table index out of range");
    if (name) *name = result->result.tables[index].first.c_str();
    if (csv) *csv = result->csv[index].c_str();
  });
}

size_t rsos_result_certified(const rsos_result* result) { return result ? result->result.exact : 0; }
size_t rsos_result_uncertified(const rsos_result* result) { return result ? result->result.inexact : 0; }

const char* rsos_result_manifest_path(const rsos_result* result) { return result ? result->manifest.c_str() : ""; }

void rsos_result_free(rsos_result* result) { delete result; }

rsos_status rsos_lattice_generate(int d, int L, double T, double rate, uint64_t seed, const char* boundary,
                                  rsos_lattice** out) {
  return guard([&] {
    require(out, "out");
    rsos::LatticeBox box;
    box.dimension = d;
    box.radius = L;
    box.horizon = T;
    box.boundary = rsos::parse_boundary(boundary ? boundary : "free");
    *out = new rsos_lattice{rsos::generate(box, rate, seed)};
  });
}

rsos_status rsos_lattice_read(const char* path, rsos_lattice** out) {
  return guard([&] {
    require(path && out, "path/out");
    std::ifstream in(path);
    if (!in) rsos::fail(rsos::ErrorCode::io, std::string("cannot open ") + path);
    *out = new rsos_lattice{rsos::read_jsonl(in)};
  });
}

rsos_status rsos_lattice_write(const rsos_lattice* lattice, const char* path) {
  return guard([&] {
    require(lattice && path, "lattice/path");
    auto out = open_out(path);
    rsos::write_jsonl(out, lattice->set);
    close_out(out, path);
  });
}

rsos_status rsos_lattice_reverse(const rsos_lattice* lattice, rsos_lattice** out) {
  return guard([&] {
    require(lattice && out, "lattice/out");
    *out = new rsos_lattice{rsos::reverse(lattice->set)};
  });
}

size_t rsos_lattice_size(const rsos_lattice* lattice) { return lattice ? lattice->set.size() : 0; }

void rsos_lattice_free(rsos_lattice* lattice) { delete lattice; }

rsos_status rsos_evolve(const rsos_lattice* lattice, const char* model, const char* init, double until,
                        const char* field_csv, const char* log_jsonl, int64_t* origin_height) {
  return guard([&] {
    require(lattice && model && init, "lattice/model/init");
    rsos::EvolveOptions opts;
    opts.record_log = log_jsonl != nullptr;
    const auto evo = rsos::evolve(lattice->set, rsos::parse_init(init), rsos::parse_model(model), until, opts);
    if (field_csv) {
      auto out = open_out(field_csv);
      rsos::write_csv(out, evo.field);
      close_out(out, field_csv);
    }
    if (log_jsonl) {
      auto out = open_out(log_jsonl);
      rsos::write_jsonl(out, evo.log);
      close_out(out, log_jsonl);
    }
    if (origin_height) *origin_height = evo.field.at(rsos::Site(lattice->set.box().dimension));
  });
}

rsos_status rsos_min_weight(const rsos_lattice* lattice, double t, const int* x, const char* model,
                            const char* init, int64_t* value, int* exact) {
  return guard([&] {
    require(lattice && x && model && init && value, "lattice/x/model/init/value");
    const int d = lattice->set.box().dimension;
    const auto site = rsos::Site::from(std::span<const int>(x, static_cast<std::size_t>(d)));
    const auto v = rsos::min_weight(lattice->set, t, site, rsos::parse_init(init), 0.0, rsos::parse_model(model));
    *value = v.value;
    if (exact) *exact = v.exact ? 1 : 0;
  });
}

rsos_status rsos_dual_run(int d, double until, uint64_t seed, rsos_dual** out) {
  return guard([&] {
    require(out, "out");
    const auto box = rsos::dual_box(d, until);
    *out = new rsos_dual{rsos::run_dual(rsos::generate(box, 1.0, seed), until)};
  });
}

rsos_status rsos_dual_run_on(const rsos_lattice* lattice, double until, rsos_dual** out) {
  return guard([&] {
    require(lattice && out, "lattice/out");
    *out = new rsos_dual{rsos::run_dual(lattice->set, until)};
  });
}

int64_t rsos_dual_minimum(const rsos_dual* dual) { return dual ? dual->traj.final_minimum() : 0; }

int rsos_dual_exact(const rsos_dual* dual) { return dual && dual->traj.exact ? 1 : 0; }

rsos_status rsos_dual_hitting_time(const rsos_dual* dual, int64_t u, double* out) {
  return guard([&] {
    require(dual && out, "dual/out");
    const auto t = rsos::hitting_time(dual->traj, u);
    if (!t) rsos::fail(rsos::ErrorCode::not_found, "height " + std::to_string(u) + " not reached");
    *out = *t;
  });
}

rsos_status rsos_dual_write_trajectory(const rsos_dual* dual, const char* path) {
  return guard([&] {
    require(dual && path, "dual/path");
    auto out = open_out(path);
    rsos::write_trajectory_csv(out, dual->traj);
    close_out(out, path);
  });
}

rsos_status rsos_dual_write_hitting(const rsos_dual* dual, const char* path) {
  return guard([&] {
    require(dual && path, "dual/path");
    auto out = open_out(path);
    rsos::write_hitting_csv(out, dual->traj);
    close_out(out, path);
  });
}

void rsos_dual_free(rsos_dual* dual) { delete dual; }

}  // extern "C"
