// rsos_lab: experiment runner and lattice utilities over the rsos C API.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsos/rsos.h"

namespace {

const char* const kExperiments[] = {
    "minpath-check", "duality-check",   "pyramid-check",   "variance",
    "growth",        "interface-stats", "coupled-restart", "perturbation",
};

struct RunArgs {
  std::string config;
  std::string output_dir;
  std::vector<std::string> set;
  long long seed = -1;
  unsigned jobs = 0;
  bool quiet = false;
};

// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or runtime error.
int report_error(const char* what, rsos_status s) {
  std::cerr << "rsos_lab: " << what << ": " << rsos_status_name(s) << ": " << rsos_last_error() << "\n";
  return 2;
}

int run_experiment(const std::string& name, const RunArgs& a) {
  rsos_config* cfg = nullptr;
  rsos_status s = a.config.empty() ? rsos_config_new(name.c_str(), &cfg) : rsos_config_load(a.config.c_str(), &cfg);
  if (s != RSOS_OK) return report_error("config", s);
  auto set = [&](const std::string& key, const std::string& value) {
    return rsos_config_set(cfg, key.c_str(), value.c_str());
  };
  s = set("experiment", name);
  if (s == RSOS_OK && a.seed >= 0) s = set("seed", std::to_string(a.seed));
  if (s == RSOS_OK && a.jobs > 0) s = set("jobs", std::to_string(a.jobs));
  if (s == RSOS_OK && !a.output_dir.empty()) s = set("output_dir", a.output_dir);
  for (const auto& kv : a.set) {
    if (s != RSOS_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "rsos_lab: --set expects key=value, got '" << kv << "'\n";
      rsos_config_free(cfg);
      return 2;
    }
    s = set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (s != RSOS_OK) {
    rsos_config_free(cfg);
    return report_error("config", s);
  }
  rsos_result* res = nullptr;
  s = rsos_run(cfg, 1, &res);
  rsos_config_free(cfg);
  if (s != RSOS_OK) return report_error(name.c_str(), s);

  if (!a.quiet) {
    for (std::size_t i = 0; i < rsos_result_table_count(res); ++i) {
      const char* tname = nullptr;
      const char* csv = nullptr;
      rsos_result_table(res, i, &tname, &csv);
      const std::string text(csv);
      if (std::count(text.begin(), text.end(), '\n') > 21) continue;
      std::cout << "# " << tname << "\n" << text << "\n";
    }
  }
  for (std::size_t i = 0; i < rsos_result_check_count(res); ++i) {
    const char* cname = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    rsos_result_check(res, i, &cname, &passed, &detail);
    std::cout << (passed ? "PASS " : "FAIL ") << cname;
    if (*detail) std::cout << "  [" << detail << "]";
    std::cout << "\n";
  }
  std::cout << "certified " << rsos_result_certified(res) << ", uncertified " << rsos_result_uncertified(res)
            << "\nmanifest " << rsos_result_manifest_path(res) << "\n";
  const int code = rsos_result_passed(res) ? 0 : 1;
  rsos_result_free(res);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSOS surface growth simulator and verification lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rsos_version()));

  RunArgs run;
  for (const char* name : kExperiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", run.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", run.seed, "master seed (overrides the config)")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", run.jobs, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", run.output_dir, "directory for reports and the manifest");
    sub->add_option("--set", run.set, "extra key=value overrides");
    sub->add_flag("--quiet", run.quiet, "print checks only");
  }

  int d = 1, L = 10;
  double T = 10.0, rate = 1.0;
  std::uint64_t seed = 1;
  std::string boundary = "free", out, lattice_in, model = "rsos", init = "zero", field_out, log_out;
  std::string trajectory_out, hitting_out;

  auto* gen = app.add_subcommand("generate", "write a Poisson lattice as JSON Lines");
  gen->add_option("--d", d, "dimension")->check(CLI::Range(1, 4));
  gen->add_option("--L", L, "box radius")->check(CLI::PositiveNumber);
  gen->add_option("--T", T, "time horizon")->check(CLI::PositiveNumber);
  gen->add_option("--rate", rate, "clock rate")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "seed");
  gen->add_option("--boundary", boundary, "free or periodic");
  gen->add_option("--out", out, "output file")->required();

  auto* evo = app.add_subcommand("evolve", "evolve a surface on a lattice file");
  evo->add_option("--lattice", lattice_in, "lattice JSON Lines file")->required()->check(CLI::ExistingFile);
  evo->add_option("--model", model, "rsos, bd or krsos:K");
  evo->add_option("--init", init, "zero, well or explicit:x=h;...");
  evo->add_option("--until", T, "evolution time")->required();
  evo->add_option("--field", field_out, "final heights CSV");
  evo->add_option("--log", log_out, "accepted updates JSON Lines");

  auto* dual = app.add_subcommand("dual-run", "run the dual process from the well");
  dual->add_option("--d", d, "dimension")->check(CLI::Range(1, 4));
  dual->add_option("--T", T, "time horizon")->check(CLI::PositiveNumber);
  dual->add_option("--seed", seed, "seed");
  dual->add_option("--lattice", lattice_in, "use this lattice instead of a fresh one")->check(CLI::ExistingFile);
  dual->add_option("--trajectory", trajectory_out, "trajectory CSV");
  dual->add_option("--hitting", hitting_out, "hitting times CSV");

  CLI11_PARSE(app, argc, argv);

  for (const char* name : kExperiments) {
    if (app.got_subcommand(name)) return run_experiment(name, run);
  }

  if (app.got_subcommand(gen)) {
    rsos_lattice* lat = nullptr;
    rsos_status s = rsos_lattice_generate(d, L, T, rate, seed, boundary.c_str(), &lat);
    if (s != RSOS_OK) return report_error("generate", s);
    s = rsos_lattice_write(lat, out.c_str());
    const std::size_t n = rsos_lattice_size(lat);
    rsos_lattice_free(lat);
    if (s != RSOS_OK) return report_error("generate", s);
    std::cout << n << " events written to " << out << "\n";
    return 0;
  }

  if (app.got_subcommand(evo)) {
    rsos_lattice* lat = nullptr;
    rsos_status s = rsos_lattice_read(lattice_in.c_str(), &lat);
    if (s != RSOS_OK) return report_error("evolve", s);
    std::int64_t h = 0;
    s = rsos_evolve(lat, model.c_str(), init.c_str(), T, field_out.empty() ? nullptr : field_out.c_str(),
                    log_out.empty() ? nullptr : log_out.c_str(), &h);
    rsos_lattice_free(lat);
    if (s != RSOS_OK) return report_error("evolve", s);
    std::cout << "height at origin " << h << "\n";
    return 0;
  }

  rsos_dual* traj = nullptr;
  rsos_status s;
  if (lattice_in.empty()) {
    s = rsos_dual_run(d, T, seed, &traj);
  } else {
    rsos_lattice* lat = nullptr;
    s = rsos_lattice_read(lattice_in.c_str(), &lat);
    if (s == RSOS_OK) s = rsos_dual_run_on(lat, T, &traj);
    rsos_lattice_free(lat);
  }
  if (s != RSOS_OK) return report_error("dual-run", s);
  if (!trajectory_out.empty()) s = rsos_dual_write_trajectory(traj, trajectory_out.c_str());
  if (s == RSOS_OK && !hitting_out.empty()) s = rsos_dual_write_hitting(traj, hitting_out.c_str());
  std::cout << "minimum " << rsos_dual_minimum(traj) << (rsos_dual_exact(traj) ? "" : " (uncertified)") << "\n";
  rsos_dual_free(traj);
  if (s != RSOS_OK) return report_error("dual-run", s);
  return 0;
}
