#include "core/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/dual.hpp"
#include "core/error.hpp"
#include "core/minpath.hpp"
#include "core/parallel.hpp"
#include "core/pyramid.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"

namespace rsos {

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used, 0);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::parse, "config key '" + key + "': expected an integer, got '" + value + "'");
}

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::parse, "config key '" + key + "': expected a number, got '" + value + "'");
}

bool known_experiment(const std::string& name) {
  return std::find(std::begin(kExperimentNames), std::end(kExperimentNames), name) != std::end(kExperimentNames);
}

}  // namespace

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "experiment") {
    if (!known_experiment(value)) fail(ErrorCode::parse, "config key 'experiment': unknown experiment '" + value + "'");
    c.experiment = value;
  } else if (key == "d") {
    c.d = static_cast<int>(to_integer(key, value));
  } else if (key == "L") {
    c.L = value == "auto" ? 0 : static_cast<int>(to_integer(key, value));
  } else if (key == "T") {
    c.T = to_real(key, value);
  } else if (key == "t") {
    c.t_grid.clear();
    for (const auto& item : split_list(value)) c.t_grid.push_back(to_real(key, item));
  } else if (key == "u") {
    c.u_grid.clear();
    for (const auto& item : split_list(value)) c.u_grid.push_back(static_cast<int>(to_integer(key, item)));
  } else if (key == "v") {
    c.v = static_cast<int>(to_integer(key, value));
  } else if (key == "k") {
    c.k = static_cast<int>(to_integer(key, value));
  } else if (key == "model") {
    c.model = parse_model(value);
  } else if (key == "init") {
    c.init = parse_init(value);
  } else if (key == "boundary") {
    c.boundary = parse_boundary(value);
  } else if (key == "replications") {
    c.replications = static_cast<int>(to_integer(key, value));
    if (c.replications < 1) fail(ErrorCode::parse, "config key 'replications': must be >= 1");
  } else if (key == "seed") {
    c.master_seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else if (key == "alpha") {
    c.alpha = to_real(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "jobs") {
    c.jobs = static_cast<unsigned>(std::max(1LL, to_integer(key, value)));
  } else if (key == "probes") {
    c.probes = static_cast<int>(to_integer(key, value));
  } else if (key == "gaps_per_run") {
    c.gaps_per_run = static_cast<int>(to_integer(key, value));
  } else if (key == "formats") {
    c.formats.clear();
    for (const auto& item : split_list(value)) {
      if (item == "csv") c.formats.push_back(ReportFormat::csv);
      else if (item == "jsonl") c.formats.push_back(ReportFormat::jsonl);
      else fail(ErrorCode::parse, "config key 'formats': unknown format '" + item + "'");
    }
  } else {
    fail(ErrorCode::parse, "unknown config key '" + key + "'");
  }
  auto it = std::find_if(c.given.begin(), c.given.end(), [&](const auto& kv) { return kv.first == key; });
  if (it == c.given.end()) c.given.emplace_back(key, value);
  else it->second = value;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig c;
  std::string line;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      fail(ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": key '" + key + "' given twice");
    }
    seen.push_back(key);
    try {
      set_config_value(c, key, trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(e.code(), origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config file " + path.string());
  return parse_config(in, path.string());
}

ExperimentConfig resolve(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.experiment.empty()) fail(ErrorCode::invalid_argument, "config field 'experiment' is required");
  const std::string& e = c.experiment;
  auto default_t = [&](std::vector<double> t) {
    if (c.t_grid.empty()) c.t_grid = std::move(t);
  };
  auto default_u = [&](std::vector<int> u) {
    if (c.u_grid.empty()) c.u_grid = std::move(u);
  };
  auto default_reps = [&](int r) {
    if (c.replications == 0) c.replications = r;
  };
  if (e == "minpath-check" || e == "pyramid-check") {
    if (c.L == 0) c.L = 2;
    if (c.T == 0.0) c.T = 2.0;
    default_reps(1000);
  } else if (e == "duality-check") {
    default_t({20.0});
    default_reps(1000);
  } else if (e == "variance") {
    default_t({5.0, 10.0, 20.0, 40.0});
    default_reps(1000);
  } else if (e == "growth") {
    default_t({100.0});
    default_u({20, 60});
    default_reps(200);
  } else if (e == "interface-stats") {
    default_t({50.0});
    default_u({10, 15, 20, 25, 30, 35, 40});
    default_reps(400);
    if (c.gaps_per_run == 0) c.gaps_per_run = 25;
  } else if (e == "coupled-restart") {
    default_u({5});
    if (c.v == 0) c.v = 5;
    default_reps(1000);
  } else if (e == "perturbation") {
    default_t({10.0});
    default_reps(500);
    if (c.probes == 0) c.probes = 10;
  }
  if (c.model.kind == ModelKind::krsos) c.model = Model::krsos(c.k);

  auto bad = [](const std::string& field, const std::string& why) {
    fail(ErrorCode::invalid_argument, "config field '" + field + "': " + why);
  };
  if (c.d < 1 || c.d > kMaxDimension) bad("d", "must be in [1, 4]");
  if (c.L < 0) bad("L", "must be positive or auto");
  if (c.T < 0.0) bad("T", "must be positive");
  if (c.replications < 1) bad("replications", "must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad("alpha", "must lie in (0, 1)");
  if (c.formats.empty()) bad("formats", "must name at least one format");
  for (double t : c.t_grid) {
    if (!(t > 0.0)) bad("t", "grid times must be positive");
  }
  for (int u : c.u_grid) {
    if (u < 1) bad("u", "grid heights must be >= 1");
  }
  const bool needs_t = e == "duality-check" || e == "variance" || e == "growth" || e == "interface-stats" ||
                       e == "perturbation";
  if (needs_t && c.t_grid.empty()) bad("t", "grid must be nonempty");
  const bool needs_u = e == "growth" || e == "interface-stats" || e == "coupled-restart";
  if (needs_u && c.u_grid.empty()) bad("u", "grid must be nonempty");
  if (e == "growth" && (c.u_grid.size() != 2 || c.u_grid[0] >= c.u_grid[1])) bad("u", "growth takes 'u = lo, hi'");
  if (e == "interface-stats" && c.d != 1) bad("d", "interface-stats is defined for d = 1 only");
  if (e == "coupled-restart" && c.v < 1) bad("v", "must be >= 1");
  if (e == "perturbation" && c.probes < 1) bad("probes", "must be >= 1");
  if (e == "interface-stats" && c.gaps_per_run < 1) bad("gaps_per_run", "must be >= 1");
  std::sort(c.t_grid.begin(), c.t_grid.end());
  return c;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// Shared helpers

CertifiedRun certified_rsos(int d, double horizon, std::uint64_t seed, const std::vector<double>& times,
                            int fixed_radius, Boundary boundary) {
  LatticeBox box;
  box.dimension = d;
  box.horizon = horizon;
  box.boundary = boundary;
  box.radius = fixed_radius > 0 ? fixed_radius : std::max(2, static_cast<int>(std::ceil(0.6 * horizon)) + 2);
  EvolveOptions opts;
  opts.record_log = false;
  for (double t : times) {
    if (t < horizon) opts.snapshot_times.push_back(t);
  }
  for (int attempt = 1;; ++attempt) {
    EventSet set = generate(box, 1.0, seed);
    Evolution evo = evolve(set, InitialCondition::zero(), Model::rsos(), horizon, opts);
    const Height h = evo.field.at(Site(d));
    const bool exact = certify(box, Site(d), h, 0, Model::rsos());
    if (exact || fixed_radius > 0) return {std::move(set), std::move(evo), attempt, exact};
    box.radius = std::max(static_cast<int>(h), static_cast<int>(std::ceil(1.25 * box.radius)));
  }
}

namespace {

/// Height at the origin at each requested time of a certified run.
std::vector<Height> heights_at(const CertifiedRun& run, const std::vector<double>& times) {
  std::vector<Height> out;
  const Site origin(run.set.box().dimension);
  for (double t : times) {
    if (t >= run.set.box().horizon) {
      out.push_back(run.evolution.field.at(origin));
    } else {
      const auto it = std::find_if(run.evolution.snapshots.begin(), run.evolution.snapshots.end(),
                                   [&](const HeightField& f) { return f.clock == t; });
      out.push_back(it->at(origin));
    }
  }
  return out;
}

template <typename R, typename Fn>
std::vector<R> replicate(const ExperimentConfig& c, Fn fn) {
  std::vector<R> out(static_cast<std::size_t>(c.replications));
  parallel_for(out.size(), c.jobs, [&](std::size_t r) { out[r] = fn(r, derive_seed(c.master_seed, r)); });
  return out;
}

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& c) {
  std::vector<std::uint64_t> s;
  for (int r = 0; r < c.replications; ++r) s.push_back(derive_seed(c.master_seed, static_cast<std::uint64_t>(r)));
  return s;
}

std::string site_label(const Site& s) {
  std::string out;
  for (int a = 0; a < s.dimension(); ++a) out += (a ? ":" : "") + std::to_string(s[a]);
  return out;
}

std::string fmt(double v) { return format_double(v); }

LatticeBox small_box(const ExperimentConfig& c) {
  LatticeBox box;
  box.dimension = c.d;
  box.radius = c.L;
  box.horizon = c.T;
  box.boundary = c.boundary;
  return box;
}

/// Optimal value over enumerated paths under the model's weight functional.
Height enumerated_value(const EventSet& set, double t, const Site& x, const InitialCondition& init,
                        const Model& model) {
  const bool maximize = model.kind == ModelKind::bd;
  Height best = maximize ? LLONG_MIN : LLONG_MAX;
  enumerate_paths(set, t, x, 0.0, [&](const PathTrace& p) {
    const Height w = (model.kind == ModelKind::krsos ? p.weight_k(model.k) : p.weight()) + init.at(p.end_site());
    best = maximize ? std::max(best, w) : std::min(best, w);
  });
  return best;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentResult minpath_check(const ExperimentConfig& c) {
  struct Row {
    std::uint64_t seed;
    std::size_t events;
    Height evolve_h, dp_h, enum_h;
    bool enumerated, agree, exact;
  };
  const LatticeBox box = small_box(c);
  const Site origin(c.d);
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    const EventSet set = generate(box, 1.0, seed);
    Row r{seed, set.size(), 0, 0, -1, false, false, true};
    r.evolve_h = evolve(set, c.init, c.model, c.T).field.at(origin);
    const auto dp = min_weight(set, c.T, origin, c.init, 0.0, c.model);
    r.dp_h = dp.value;
    r.exact = dp.exact;
    r.enumerated = set.count_between(0.0, c.T) <= kEnumerationCap;
    if (r.enumerated) r.enum_h = enumerated_value(set, c.T, origin, c.init, c.model);
    r.agree = r.evolve_h == r.dp_h && (!r.enumerated || r.enum_h == r.dp_h);
    return r;
  });
  ExperimentResult res;
  Table t({"seed", "events", "evolve_height", "dp_height", "enum_height", "enumerated", "agree", "exact"});
  std::size_t agree = 0, enumerated = 0;
  for (const auto& r : rows) {
    t.add_row({static_cast<std::int64_t>(r.seed), static_cast<std::int64_t>(r.events), r.evolve_h, r.dp_h,
               r.enum_h, r.enumerated, r.agree, r.exact});
    agree += r.agree;
    enumerated += r.enumerated;
    (r.exact ? res.exact : res.inexact)++;
  }
  res.tables.emplace_back("paths", std::move(t));
  res.checks.push_back({"evolve = dp = enumeration (" + c.model.name() + ", " + c.init.name() + ")",
                        agree == rows.size(),
                        std::to_string(agree) + "/" + std::to_string(rows.size()) + " agree, " +
                            std::to_string(enumerated) + " enumerated"});
  return res;
}

ExperimentResult duality_check(const ExperimentConfig& c) {
  const double t = c.t_grid.front();
  struct Row {
    std::uint64_t seed;
    Height rsos_h, dual_min, independent_dual;
    bool exact;
  };
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    LatticeBox box = dual_box(c.d, t);
    if (c.L > 0) box.radius = c.L;
    const EventSet set = generate(box, 1.0, seed);
    const Site origin(c.d);
    EvolveOptions opts;
    opts.record_log = false;
    const Height h = evolve(set, InitialCondition::zero(), Model::rsos(), t, opts).field.at(origin);
    const auto dual = run_dual(reverse(set), t);
    const auto other = run_dual(generate(box, 1.0, derive_seed(seed, 1)), t);
    const bool exact = dual.exact && other.exact && certify(box, origin, h, 0, Model::rsos());
    return Row{seed, h, dual.final_minimum(), other.final_minimum(), exact};
  });
  ExperimentResult res;
  Table paths({"seed", "rsos_height", "dual_min_reversed", "dual_min_independent", "agree", "exact"});
  std::size_t agree = 0, exact_rows = 0;
  std::vector<double> a, b;
  for (const auto& r : rows) {
    paths.add_row({static_cast<std::int64_t>(r.seed), r.rsos_h, r.dual_min, r.independent_dual,
                   r.rsos_h == r.dual_min, r.exact});
    (r.exact ? res.exact : res.inexact)++;
    if (!r.exact) continue;
    ++exact_rows;
    agree += r.rsos_h == r.dual_min;
    a.push_back(static_cast<double>(r.rsos_h));
    b.push_back(static_cast<double>(r.independent_dual));
  }
  res.tables.emplace_back("pathwise", std::move(paths));
  res.checks.push_back({"pathwise duality on reversed lattices", agree == exact_rows && exact_rows > 0,
                        std::to_string(agree) + "/" + std::to_string(exact_rows) + " certified lattices agree"});
  if (a.size() >= kMinKsSamples) {
    const auto ks = ks_two_sample(a, b, c.alpha);
    Table dist({"t", "n", "D", "dkw_band", "p_asymptotic", "within_band"});
    dist.add_row({t, static_cast<std::int64_t>(a.size()), ks.d, ks.dkw_band, ks.p_asymptotic, ks.within_band()});
    res.tables.emplace_back("distribution", std::move(dist));
    res.checks.push_back({"independent ensembles within DKW band", ks.within_band(),
                          "D=" + fmt(ks.d) + " band=" + fmt(ks.dkw_band)});
  }
  return res;
}

ExperimentResult pyramid_check(const ExperimentConfig& c) {
  struct Row {
    std::uint64_t seed;
    std::size_t events;
    bool searched;
    int via_rsos, brute, dual_brute;
    std::size_t pyramids;
    bool pushdown_ok, extract_ok;
  };
  const LatticeBox box = small_box(c);
  const Site origin(c.d);
  const double t = c.T;
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    const EventSet set = generate(box, 1.0, seed);
    Row r{seed, set.size(), false, 0, -1, -1, 0, true, true};
    r.via_rsos = max_pyramid_height(set, origin, t, PyramidMethod::via_rsos);
    const auto evo = evolve(set, InitialCondition::zero(), Model::rsos(), t);
    r.extract_ok = validate_against(set, extract_pyramid(evo.log, origin, t));
    r.searched = set.upper_bound(t) <= kPyramidBruteForceCap;
    if (!r.searched) return r;
    r.brute = max_pyramid_height(set, origin, t, PyramidMethod::brute_force);
    r.dual_brute = max_dual_pyramid_height(reverse(set), origin, t, PyramidMethod::brute_force);
    for (int h = 1; h <= r.brute; ++h) {
      enumerate_pyramids(set, PyramidKind::pyramid, RadiusLaw::foundation_consistent, origin, t, h,
                         [&](const Pyramid& p) {
                           ++r.pyramids;
                           const Pyramid q = pushdown(set, p);
                           bool ok = q.height == p.height && validate_against(set, q);
                           for (const auto& layer : q.layers) {
                             for (const auto& u : layer) ok = ok && evo.log.find(u.time, box.index_of(u.site)).has_value();
                           }
                           r.pushdown_ok = r.pushdown_ok && ok;
                           return true;
                         });
    }
    return r;
  });
  ExperimentResult res;
  Table tab({"seed", "events", "searched", "via_rsos", "brute_force", "dual_brute_force_reversed", "pyramids",
             "pushdown_ok", "extract_ok", "agree"});
  std::size_t searched = 0, agree = 0, push_ok = 0, extract_ok = 0, pyramids = 0;
  for (const auto& r : rows) {
    const bool ag = !r.searched || (r.via_rsos == r.brute && r.brute == r.dual_brute);
    tab.add_row({static_cast<std::int64_t>(r.seed), static_cast<std::int64_t>(r.events), r.searched, r.via_rsos,
                 r.brute, r.dual_brute, static_cast<std::int64_t>(r.pyramids), r.pushdown_ok, r.extract_ok, ag});
    searched += r.searched;
    agree += r.searched && ag;
    push_ok += r.pushdown_ok;
    extract_ok += r.extract_ok;
    pyramids += r.pyramids;
    res.exact++;
  }
  res.tables.emplace_back("pyramids", std::move(tab));
  res.checks.push_back({"via_rsos = brute force = reversed dual brute force", agree == searched && searched > 0,
                        std::to_string(agree) + "/" + std::to_string(searched) + " searched lattices"});
  res.checks.push_back({"pushdown lands in the accepted log with equal height", push_ok == rows.size(),
                        std::to_string(pyramids) + " pyramids pushed down"});
  res.checks.push_back({"accepted log forms a valid pyramid", extract_ok == rows.size(),
                        std::to_string(extract_ok) + "/" + std::to_string(rows.size())});
  return res;
}

ExperimentResult variance_experiment(const ExperimentConfig& c) {
  const double horizon = c.t_grid.back();
  struct Row {
    std::vector<Height> h;
    std::vector<std::int64_t> clock_count;
    bool exact;
    int attempts;
  };
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    const CertifiedRun run = certified_rsos(c.d, horizon, seed, c.t_grid, c.L, c.boundary);
    Row r{heights_at(run, c.t_grid), {}, run.exact, run.attempts};
    const int origin = run.set.geometry().origin_index();
    for (double t : c.t_grid) r.clock_count.push_back(static_cast<std::int64_t>(run.set.count_at(static_cast<std::size_t>(origin), t)));
    return r;
  });
  ExperimentResult res;
  std::vector<std::vector<double>> samples(c.t_grid.size());
  std::size_t dominance_violations = 0;
  for (const auto& r : rows) {
    (r.exact ? res.exact : res.inexact)++;
    if (!r.exact) continue;
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
      samples[i].push_back(static_cast<double>(r.h[i]));
      if (r.h[i] > r.clock_count[i]) ++dominance_violations;
    }
  }
  if (samples.front().empty()) fail(ErrorCode::invalid_argument, "no certified replications");
  const auto vrows = variance_summary(c.t_grid, samples, 0.99, derive_seed(c.master_seed, kBootstrapStream));
  Table var({"t", "n", "var", "ci_lo", "ci_hi", "var_over_t", "var_over_log_t", "var_le_t"});
  bool all_le = true, nondecreasing = true;
  double min_log_ratio = INFINITY;
  for (std::size_t i = 0; i < vrows.size(); ++i) {
    const auto& v = vrows[i];
    var.add_row({v.t, static_cast<std::int64_t>(v.n), v.var, v.ci.lo, v.ci.hi, v.var_over_t, v.var_over_log_t,
                 v.ci.hi <= v.t});
    all_le = all_le && v.ci.hi <= v.t;
    if (i > 0) nondecreasing = nondecreasing && v.var >= vrows[i - 1].var;
    if (v.t > 1.0) min_log_ratio = std::min(min_log_ratio, v.var_over_log_t);
  }
  res.tables.emplace_back("variance", std::move(var));
  res.checks.push_back({"99% bootstrap upper bound of Var <= t at every t", all_le, ""});
  res.checks.push_back({"height <= clock count at the origin (every replication, every t)",
                        dominance_violations == 0, std::to_string(dominance_violations) + " violations"});
  res.checks.push_back({"variance nondecreasing in t", nondecreasing, ""});
  res.checks.push_back({"var/log t bounded below by a positive constant", min_log_ratio > 0.0,
                        "min var/log t = " + fmt(min_log_ratio)});

  Table growth({"t", "n", "mean_f_over_t", "lower_limit", "p_f_le_t_over_10d", "union_bound", "below_bound"});
  bool growth_ok = true, bound_ok = true;
  const double lower = 1.0 / (10.0 * c.d);
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    const double t = c.t_grid[i];
    const double m = mean(samples[i]) / t;
    const double cut = t / (10.0 * c.d);
    const double p = static_cast<double>(std::count_if(samples[i].begin(), samples[i].end(),
                                                       [&](double h) { return h <= cut; })) /
                     static_cast<double>(samples[i].size());
    const double ub = path_union_bound(t, c.d);
    growth.add_row({t, static_cast<std::int64_t>(samples[i].size()), m, lower, p, ub, p <= ub});
    growth_ok = growth_ok && m > lower && m <= 1.0;
    if (t >= 30.0) bound_ok = bound_ok && p <= ub;
  }
  res.tables.emplace_back("growth_bounds", std::move(growth));
  res.checks.push_back({"mean f(t,0)/t in (1/(10d), 1] at every t", growth_ok, ""});
  res.checks.push_back({"P(f <= t/(10d)) <= union bound for t >= 30", bound_ok, ""});
  return res;
}

ExperimentResult growth_experiment(const ExperimentConfig& c) {
  const double t_m = c.t_grid.back();
  const int u_lo = c.u_grid[0];
  const int u_hi = c.u_grid[1];
  const double horizon = std::max(t_m, 2.5 * u_hi + 10.0);
  struct Row {
    std::vector<double> hitting;
    double m_over_t;
    bool exact;
  };
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    LatticeBox box = dual_box(c.d, horizon);
    if (c.L > 0) box.radius = c.L;
    const auto traj = run_dual(generate(box, 1.0, seed), horizon);
    return Row{traj.hitting, static_cast<double>(traj.minimum_at(t_m)) / t_m, traj.exact};
  });
  ExperimentResult res;
  std::vector<std::vector<double>> tables;
  std::vector<double> ratios;
  for (const auto& r : rows) {
    (r.exact ? res.exact : res.inexact)++;
    if (!r.exact) continue;
    tables.push_back(r.hitting);
    ratios.push_back(r.m_over_t);
  }
  const auto g = growth_rate_estimate(tables, u_lo, u_hi);
  const double m = mean(ratios);
  const double se_m = std::sqrt(variance(ratios) / static_cast<double>(ratios.size()));
  const double combined = std::sqrt(se_m * se_m + g.stderr_rho_inv * g.stderr_rho_inv);
  const bool consistent = std::abs(m - g.rho_inv_hat) <= 2.0 * combined;
  const double lower = 1.0 / (10.0 * c.d);

  Table hit({"u", "n", "mean_T_u"});
  for (int u = 0; u <= u_hi; ++u) {
    std::vector<double> col;
    for (const auto& tab : tables) {
      if (tab.size() > static_cast<std::size_t>(u)) col.push_back(tab[static_cast<std::size_t>(u)]);
    }
    hit.add_row({static_cast<std::int64_t>(u), static_cast<std::int64_t>(col.size()), mean(col)});
  }
  res.tables.emplace_back("hitting", std::move(hit));
  Table est({"u_lo", "u_hi", "replications", "rho_hat", "rho_hat_se", "rho_inv_hat", "rho_inv_se", "t",
             "mean_M_over_t", "M_over_t_se", "consistent_2se"});
  est.add_row({static_cast<std::int64_t>(u_lo), static_cast<std::int64_t>(u_hi),
               static_cast<std::int64_t>(g.replications), g.rho_hat, g.stderr_rho, g.rho_inv_hat, g.stderr_rho_inv,
               t_m, m, se_m, consistent});
  res.tables.emplace_back("rate", std::move(est));
  res.checks.push_back({"rho_inv_hat in (1/(10d), 1]", g.rho_inv_hat > lower && g.rho_inv_hat <= 1.0,
                        "rho_inv_hat=" + fmt(g.rho_inv_hat)});
  res.checks.push_back({"mean M_t/t in (1/(10d), 1]", m > lower && m <= 1.0, "M_t/t=" + fmt(m)});
  res.checks.push_back({"regression and M_t/t estimates agree within 2 combined standard errors", consistent,
                        "difference=" + fmt(m - g.rho_inv_hat) + " combined_se=" + fmt(combined)});
  return res;
}

}  // namespace

SlopeStability sigma_slope_stability(const std::vector<double>& us, const std::vector<double>& sigma_sq) {
  std::vector<double> logs;
  for (double u : us) logs.push_back(std::log(u));
  const std::size_t mid = us.size() / 2;
  SlopeStability s;
  s.slope_all = least_squares(logs, sigma_sq).slope;
  s.slope_lo = least_squares(std::span(logs).first(mid + 1), std::span(sigma_sq).first(mid + 1)).slope;
  s.slope_hi = least_squares(std::span(logs).subspan(mid), std::span(sigma_sq).subspan(mid)).slope;
  s.stable = std::abs(s.slope_lo - s.slope_hi) <= 0.3 * std::abs(s.slope_all);
  return s;
}

namespace {

ExperimentResult interface_experiment(const ExperimentConfig& c) {
  const double t = c.t_grid.front();
  const int u_max = *std::max_element(c.u_grid.begin(), c.u_grid.end());
  const double horizon = std::max(t, 2.5 * u_max + 20.0);
  const auto k = static_cast<std::size_t>(c.gaps_per_run);
  struct Row {
    std::vector<double> gaps;
    bool gaps_complete;
    double width, count;
    std::vector<std::optional<BerryEsseen>> be;
    std::optional<double> direct, resampled_eligible, resampled_width;
    bool exact;
  };
  const int u_probe = c.u_grid.front();
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    const LatticeBox box = dual_box(1, horizon);
    const auto traj = run_dual(generate(box, 1.0, seed), horizon);
    const auto st = interface_stats(traj, {t});
    Row r;
    r.exact = traj.exact;
    r.gaps_complete = st.right_interarrivals.size() >= k;
    r.gaps.assign(st.right_interarrivals.begin(),
                  st.right_interarrivals.begin() + static_cast<std::ptrdiff_t>(std::min(k, st.right_interarrivals.size())));
    r.width = static_cast<double>(st.widths[0]);
    r.count = static_cast<double>(st.counts[0]);
    for (int u : c.u_grid) r.be.push_back(berry_esseen_stats(traj, u));
    r.direct = hitting_time(traj, u_probe);
    Stream s = Stream(seed).child(kResampleStream);
    r.resampled_eligible = resample_hitting_time(traj, u_probe, RateConvention::eligible_sites, s);
    r.resampled_width = resample_hitting_time(traj, u_probe, RateConvention::interface_width, s);
    return r;
  });
  ExperimentResult res;
  std::vector<double> gaps, widths, counts, direct, re_el, re_w;
  std::size_t incomplete = 0;
  std::vector<std::vector<double>> sig(c.u_grid.size()), mus(c.u_grid.size()), thetas(c.u_grid.size());
  for (const auto& r : rows) {
    (r.exact ? res.exact : res.inexact)++;
    if (!r.exact) continue;
    incomplete += !r.gaps_complete;
    gaps.insert(gaps.end(), r.gaps.begin(), r.gaps.end());
    widths.push_back(r.width / t);
    counts.push_back(r.count / (t * t));
    for (std::size_t i = 0; i < c.u_grid.size(); ++i) {
      if (!r.be[i]) continue;
      sig[i].push_back(r.be[i]->sigma_sq);
      mus[i].push_back(r.be[i]->mu);
      thetas[i].push_back(r.be[i]->theta);
    }
    if (r.direct) {
      direct.push_back(*r.direct);
      re_el.push_back(*r.resampled_eligible);
      re_w.push_back(*r.resampled_width);
    }
  }
  const auto ks = ks_one_sample_exponential(gaps, 1.0, c.alpha);
  Table gap_tab({"n", "runs_incomplete", "D", "p_asymptotic", "pass"});
  gap_tab.add_row({static_cast<std::int64_t>(gaps.size()), static_cast<std::int64_t>(incomplete), ks.d,
                   ks.p_asymptotic, ks.p_asymptotic >= c.alpha});
  res.tables.emplace_back("edge_interarrivals", std::move(gap_tab));
  res.checks.push_back({"right-edge interarrivals ~ Exp(1) (KS)", ks.p_asymptotic >= c.alpha && incomplete == 0,
                        "D=" + fmt(ks.d) + " p=" + fmt(ks.p_asymptotic)});

  const double wm = mean(widths), wse = std::sqrt(variance(widths) / static_cast<double>(widths.size()));
  const double nm = mean(counts), nse = std::sqrt(variance(counts) / static_cast<double>(counts.size()));
  Table scal({"quantity", "t", "n", "mean", "se", "target", "z", "within_3se"});
  scal.add_row({std::string("I_t/t"), t, static_cast<std::int64_t>(widths.size()), wm, wse, 2.0, (wm - 2.0) / wse,
                std::abs(wm - 2.0) <= 3.0 * wse});
  scal.add_row({std::string("N_t/t^2"), t, static_cast<std::int64_t>(counts.size()), nm, nse, 1.0,
                (nm - 1.0) / nse, std::abs(nm - 1.0) <= 3.0 * nse});
  res.tables.emplace_back("scaling", std::move(scal));
  res.checks.push_back({"I_t/t within 3 SE of 2", std::abs(wm - 2.0) <= 3.0 * wse, "mean=" + fmt(wm) + " se=" + fmt(wse)});
  res.checks.push_back({"N_t/t^2 within 3 SE of 1", std::abs(nm - 1.0) <= 3.0 * nse, "mean=" + fmt(nm) + " se=" + fmt(nse)});

  Table be({"u", "n", "mean_mu", "mean_sigma_sq", "mean_theta", "sigma_sq_over_log_u"});
  std::vector<double> us, sigma_means;
  for (std::size_t i = 0; i < c.u_grid.size(); ++i) {
    const double u = c.u_grid[i];
    if (sig[i].empty()) continue;
    us.push_back(u);
    sigma_means.push_back(mean(sig[i]));
    be.add_row({static_cast<std::int64_t>(c.u_grid[i]), static_cast<std::int64_t>(sig[i].size()), mean(mus[i]),
                mean(sig[i]), mean(thetas[i]), mean(sig[i]) / std::log(u)});
  }
  res.tables.emplace_back("berry_esseen", std::move(be));
  if (us.size() >= 4) {
    const auto s = sigma_slope_stability(us, sigma_means);
    res.checks.push_back({"sigma_u^2 vs log u slope stable within 30%", s.stable,
                          "slopes all/lo/hi = " + fmt(s.slope_all) + "/" + fmt(s.slope_lo) + "/" + fmt(s.slope_hi)});
  }
  if (direct.size() >= kMinKsSamples) {
    const auto k_el = ks_two_sample(direct, re_el, c.alpha);
    const auto k_w = ks_two_sample(direct, re_w, c.alpha);
    Table rs({"u", "convention", "n", "D", "dkw_band", "p_asymptotic", "within_band"});
    rs.add_row({static_cast<std::int64_t>(u_probe), std::string("eligible_sites"),
                static_cast<std::int64_t>(direct.size()), k_el.d, k_el.dkw_band, k_el.p_asymptotic, k_el.within_band()});
    rs.add_row({static_cast<std::int64_t>(u_probe), std::string("interface_width"),
                static_cast<std::int64_t>(direct.size()), k_w.d, k_w.dkw_band, k_w.p_asymptotic, k_w.within_band()});
    res.tables.emplace_back("resampling", std::move(rs));
    res.checks.push_back({"conditional resampling of T(u) matches direct T(u)", k_el.within_band(),
                          "D=" + fmt(k_el.d) + " band=" + fmt(k_el.dkw_band)});
  }
  return res;
}

ExperimentResult coupled_experiment(const ExperimentConfig& c) {
  const int u = c.u_grid.front();
  const int v = c.v;
  struct Row {
    std::uint64_t seed;
    RestartRecord rec;
    std::optional<double> fresh;
    bool fresh_exact;
  };
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    Row r{seed, {}, std::nullopt, true};
    for (double horizon = 4.0 * (u + v) + 20.0;; horizon *= 2.0) {
      LatticeBox box = dual_box(c.d, horizon);
      if (c.L > 0) box.radius = c.L;
      r.rec = coupled_restart(generate(box, 1.0, seed), u, v);
      if ((r.rec.t_star && r.rec.t_uv) || c.L > 0) break;
    }
    for (double horizon = 4.0 * v + 20.0;; horizon *= 2.0) {
      LatticeBox box = dual_box(c.d, horizon);
      if (c.L > 0) box.radius = c.L;
      const auto traj = run_dual(generate(box, 1.0, derive_seed(seed, 1)), horizon);
      r.fresh = hitting_time(traj, v);
      r.fresh_exact = traj.exact;
      if (r.fresh || c.L > 0) break;
    }
    return r;
  });
  ExperimentResult res;
  Table tab({"seed", "T_u", "T_star", "T_uv", "inequality_holds", "dominance_holds", "exact"});
  std::size_t holds = 0, n = 0;
  std::vector<double> stars, fresh;
  for (const auto& r : rows) {
    const auto& rec = r.rec;
    auto opt = [](const std::optional<double>& x) -> Cell { return x ? Cell(*x) : Cell(std::string("")); };
    tab.add_row({static_cast<std::int64_t>(r.seed), opt(rec.t_u), opt(rec.t_star), opt(rec.t_uv),
                 rec.inequality_holds, rec.dominance_holds, rec.exact});
    const bool ok = rec.exact && r.fresh_exact && rec.t_star && rec.t_uv && r.fresh;
    (ok ? res.exact : res.inexact)++;
    if (!ok) continue;
    ++n;
    holds += rec.inequality_holds && rec.dominance_holds;
    stars.push_back(*rec.t_star);
    fresh.push_back(*r.fresh);
  }
  res.tables.emplace_back("restart", std::move(tab));
  res.checks.push_back({"T(u+v) >= T(u) + T* and B >= A on every run", holds == n && n > 0,
                        std::to_string(holds) + "/" + std::to_string(n)});
  if (stars.size() >= kMinKsSamples) {
    const auto ks = ks_two_sample(stars, fresh, c.alpha);
    Table dist({"u", "v", "n", "D", "dkw_band", "p_asymptotic", "within_band"});
    dist.add_row({static_cast<std::int64_t>(u), static_cast<std::int64_t>(v), static_cast<std::int64_t>(stars.size()),
                  ks.d, ks.dkw_band, ks.p_asymptotic, ks.within_band()});
    res.tables.emplace_back("distribution", std::move(dist));
    res.checks.push_back({"T* matches fresh T(v) within DKW band", ks.within_band(),
                          "D=" + fmt(ks.d) + " band=" + fmt(ks.dkw_band)});
  }
  return res;
}

}  // namespace

std::vector<ProbeOutcome> perturbation_probes(const EventSet& set, double t, int probes, Stream& stream) {
  const auto& box = set.box();
  const auto& geom = set.geometry();
  const Site origin(box.dimension);
  const PathTrace path = argmin_path(set, t, origin, InitialCondition::zero());
  std::vector<ProbeOutcome> out;
  for (int i = 0; i < probes; ++i) {
    ProbeOutcome o;
    for (;;) {
      o.point.time = box.snap_time(stream.uniform() * t);
      o.point.site = geom.site(stream.below(geom.site_count()));
      if (o.point.time > 0.0 && !set.contains(o.point) && o.point.time < t) {
        bool clash = false;
        for (const auto& e : set.events()) clash = clash || e.time == o.point.time;
        if (!clash) break;
      }
    }
    const EventSet perturbed = insert_event(set, o.point);
    Surface a(set.shared_geometry(), Model::rsos(), InitialCondition::zero().materialize(geom));
    Surface b(set.shared_geometry(), Model::rsos(), InitialCondition::zero().materialize(geom));
    const auto ea = set.events();
    const auto eb = perturbed.events();
    std::size_t i_a = 0;
    for (std::size_t i_b = 0; i_b < eb.size() && eb[i_b].time <= t; ++i_b) {
      const Event& e = eb[i_b];
      b.apply(e.site);
      if (i_a < ea.size() && ea[i_a].time == e.time) {
        a.apply(e.site);
        ++i_a;
      }
      const Height diff = b.height(e.site) - a.height(e.site);
      o.min_change = std::min(o.min_change, diff);
      o.max_change = std::max(o.max_change, diff);
    }
    o.target_change = b.height(geom.origin_index()) - a.height(geom.origin_index());
    o.on_path = on_path(path, o.point);
    out.push_back(o);
  }
  return out;
}

namespace {

ExperimentResult perturbation_experiment(const ExperimentConfig& c) {
  const double t = c.t_grid.front();
  struct Row {
    std::uint64_t seed;
    std::vector<ProbeOutcome> probes;
    double volume;
  };
  auto rows = replicate<Row>(c, [&](std::size_t, std::uint64_t seed) {
    const CertifiedRun run = certified_rsos(c.d, t, seed, {t}, c.L, c.boundary);
    Stream s = Stream(seed).child(kProbeStream);
    return Row{seed, perturbation_probes(run.set, t, c.probes, s),
               static_cast<double>(run.set.box().site_count()) * t};
  });
  ExperimentResult res;
  Table tab({"seed", "probe", "t", "x", "target_change", "min_change", "max_change", "on_path"});
  std::size_t in_range = 0, total = 0, off_path = 0, off_path_zero = 0;
  std::vector<double> density;
  for (const auto& r : rows) {
    res.exact++;
    for (std::size_t i = 0; i < r.probes.size(); ++i) {
      const auto& o = r.probes[i];
      tab.add_row({static_cast<std::int64_t>(r.seed), static_cast<std::int64_t>(i), o.point.time,
                   site_label(o.point.site), o.target_change, o.min_change, o.max_change, o.on_path});
      ++total;
      in_range += o.min_change >= 0 && o.max_change <= 1;
      if (!o.on_path) {
        ++off_path;
        off_path_zero += o.target_change == 0;
      }
      density.push_back(o.target_change == 1 ? r.volume / t : 0.0);
    }
  }
  res.tables.emplace_back("probes", std::move(tab));
  const double dm = mean(density), dse = std::sqrt(variance(density) / static_cast<double>(density.size()));
  Table inf({"probes", "influential_per_unit_time", "se", "bound"});
  inf.add_row({static_cast<std::int64_t>(density.size()), dm, dse, 1.0});
  res.tables.emplace_back("influence", std::move(inf));
  res.checks.push_back({"height change in {0, +1} at every event time and site", in_range == total,
                        std::to_string(in_range) + "/" + std::to_string(total)});
  res.checks.push_back({"insertions off the minimizing path leave the target unchanged", off_path_zero == off_path,
                        std::to_string(off_path_zero) + "/" + std::to_string(off_path)});
  res.checks.push_back({"influential insertions per unit time <= 1 (+3 SE)", dm <= 1.0 + 3.0 * dse,
                        "mean=" + fmt(dm) + " se=" + fmt(dse)});
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  ExperimentResult res;
  const std::string& e = c.experiment;
  if (e == "minpath-check") res = minpath_check(c);
  else if (e == "duality-check") res = duality_check(c);
  else if (e == "pyramid-check") res = pyramid_check(c);
  else if (e == "variance") res = variance_experiment(c);
  else if (e == "growth") res = growth_experiment(c);
  else if (e == "interface-stats") res = interface_experiment(c);
  else if (e == "coupled-restart") res = coupled_experiment(c);
  else if (e == "perturbation") res = perturbation_experiment(c);
  res.experiment = e;
  res.seeds = seeds_of(c);
  return res;
}

RunManifest write_outputs(const ExperimentConfig& config, const ExperimentResult& result, double wall_seconds) {
  const ExperimentConfig c = resolve(config);
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + c.output_dir.string() + ": " + ec.message());

  RunManifest m;
  m.wall_seconds = wall_seconds;
  std::vector<std::filesystem::path> files;
  for (const auto& [name, table] : result.tables) {
    for (auto& p : emit_report(table, c.output_dir / (result.experiment + "." + name), c.formats)) files.push_back(p);
  }
  Table checks({"check", "passed", "detail"});
  for (const auto& ch : result.checks) checks.add_row({ch.name, ch.passed, ch.detail});
  for (auto& p : emit_report(checks, c.output_dir / (result.experiment + ".checks"), c.formats)) files.push_back(p);

  nlohmann::ordered_json j;
  j["experiment"] = result.experiment;
  j["code_version"] = RSOS_VERSION_STRING;
  nlohmann::ordered_json cfg;
  cfg["d"] = c.d;
  cfg["L"] = c.L == 0 ? nlohmann::ordered_json("auto") : nlohmann::ordered_json(c.L);
  cfg["T"] = c.T;
  cfg["t"] = c.t_grid;
  cfg["u"] = c.u_grid;
  cfg["v"] = c.v;
  cfg["k"] = c.k;
  cfg["model"] = c.model.name();
  cfg["init"] = c.init.name();
  cfg["boundary"] = to_string(c.boundary);
  cfg["replications"] = c.replications;
  cfg["seed"] = c.master_seed;
  cfg["alpha"] = c.alpha;
  cfg["probes"] = c.probes;
  cfg["gaps_per_run"] = c.gaps_per_run;
  cfg["output_dir"] = c.output_dir.string();
  cfg["jobs"] = c.jobs;
  j["config"] = cfg;
  nlohmann::ordered_json given = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.given) given[k] = v;
  j["config_given"] = given;
  j["replication_seeds"] = result.seeds;
  j["exactness"] = {{"certified", result.exact}, {"uncertified", result.inexact}};
  nlohmann::ordered_json checks_json = nlohmann::ordered_json::array();
  for (const auto& ch : result.checks) checks_json.push_back({{"check", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = checks_json;
  j["passed"] = result.passed();
  j["wall_clock_seconds"] = wall_seconds;
  nlohmann::ordered_json digests = nlohmann::ordered_json::object();
  for (const auto& f : files) {
    const std::string d = sha256_file(f);
    digests[f.filename().string()] = d;
    m.digests[f.filename().string()] = d;
  }
  j["outputs_sha256"] = digests;

  m.path = c.output_dir / (result.experiment + ".manifest.json");
  std::ofstream out(m.path);
  if (!out) fail(ErrorCode::io, "cannot open " + m.path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::io, "failed writing " + m.path.string());
  return m;
}

RunManifest run_and_write(const ExperimentConfig& config, ExperimentResult& result) {
  const auto start = std::chrono::steady_clock::now();
  result = run_experiment(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return write_outputs(config, result, wall);
}

}  // namespace rsos
