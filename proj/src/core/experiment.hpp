#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "core/lattice.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"
#include "core/surface.hpp"

namespace rsos {

inline constexpr const char* kExperimentNames[] = {
    "minpath-check", "duality-check",   "pyramid-check", "variance",
    "growth",        "interface-stats", "coupled-restart", "perturbation",
};

/// Flat key = value configuration. Keys not set keep the per-experiment
/// defaults listed in the README; unknown keys are rejected at parse time.
struct ExperimentConfig {
  std::string experiment;
  int d = 1;
  int L = 0;  // 0 = auto
  double T = 0.0;  // 0 = experiment default
  std::vector<double> t_grid;
  std::vector<int> u_grid;
  int v = 0;
  int k = 1;
  Model model;
  InitialCondition init;
  Boundary boundary = Boundary::free;
  int replications = 0;
  std::uint64_t master_seed = 1;
  double alpha = 0.01;
  std::filesystem::path output_dir = ".";
  unsigned jobs = 1;
  int probes = 0;
  int gaps_per_run = 0;
  std::vector<ReportFormat> formats{ReportFormat::csv, ReportFormat::jsonl};
  /// Keys given explicitly (in file order), echoed into the manifest.
  std::vector<std::pair<std::string, std::string>> given;
};

ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Apply one key = value setting (also used for command-line overrides).
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Fill unset fields with the experiment's defaults and check invariants.
ExperimentConfig resolve(const ExperimentConfig& config);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<Check> checks;
  std::vector<std::uint64_t> seeds;
  std::size_t exact = 0;
  std::size_t inexact = 0;

  bool passed() const;
};

/// Computes everything in memory; identical configs give identical results
/// regardless of the job count.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RunManifest {
  std::filesystem::path path;
  std::map<std::string, std::string> digests;  // file name -> sha256
  double wall_seconds = 0.0;
};

/// Writes one report per table (`<experiment>.<table>.csv/.jsonl`), a checks
/// report and the JSON manifest into config.output_dir.
RunManifest write_outputs(const ExperimentConfig& config, const ExperimentResult& result, double wall_seconds);

/// Runs, writes and returns the manifest; the result is stored in `result`.
RunManifest run_and_write(const ExperimentConfig& config, ExperimentResult& result);

/// Zero-initialized RSOS lattice around the origin whose box is grown until
/// the exactness certificate for the height at (t, 0) holds at every t.
struct CertifiedRun {
  EventSet set;
  Evolution evolution;
  int attempts = 1;
  bool exact = true;
};

CertifiedRun certified_rsos(int d, double horizon, std::uint64_t seed, const std::vector<double>& times,
                            int fixed_radius = 0, Boundary boundary = Boundary::free);

/// Slopes of mean sigma_u^2 against log u over the whole grid and over its
/// lower and upper halves (sharing the middle point); stable when the half
/// slopes differ by at most 30% of the full slope.
struct SlopeStability {
  double slope_all = 0.0, slope_lo = 0.0, slope_hi = 0.0;
  bool stable = false;
};

SlopeStability sigma_slope_stability(const std::vector<double>& us, const std::vector<double>& sigma_sq);

/// One random insertion into a zero-initialized RSOS lattice: the change of
/// the height at the origin at time t and the range of changes seen at the
/// updated site after every event.
struct ProbeOutcome {
  SpaceTimePoint point;
  Height target_change = 0;
  Height min_change = 0;
  Height max_change = 0;
  bool on_path = false;
};

std::vector<ProbeOutcome> perturbation_probes(const EventSet& set, double t, int probes, Stream& stream);

}  // namespace rsos
