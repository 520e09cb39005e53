#include "core/minpath.hpp"

#include <algorithm>
#include <ostream>

#include "core/error.hpp"

namespace rsos {

std::int64_t PathTrace::weight_k(int k) const noexcept {
  std::int64_t w = 0;
  for (const auto& step : steps) w += step.move == 0 ? 1 : k;
  return w;
}

Site PathTrace::position_at(double tau) const {
  Site cur = start.site;
  for (const auto& step : steps) {
    if (tau >= step.time) return cur;
    cur = cur + direction_offset(cur.dimension(), step.move);
  }
  return cur;
}

Site PathTrace::end_site() const {
  Site cur = start.site;
  for (const auto& step : steps) cur = cur + direction_offset(cur.dimension(), step.move);
  return cur;
}

namespace {

/// Latest event at `site` with s < time <= tau (or < tau when strict), as a
/// slot index into the flattened per-site lists.
std::optional<std::size_t> latest_event(const EventSet& set, std::size_t site, double s, double tau,
                                        bool strict) {
  const auto times = set.times_at(site);
  auto it = strict ? std::lower_bound(times.begin(), times.end(), tau)
                   : std::upper_bound(times.begin(), times.end(), tau);
  if (it == times.begin()) return std::nullopt;
  --it;
  if (*it <= s) return std::nullopt;
  return set.site_offset(site) + static_cast<std::size_t>(it - times.begin());
}

void check_window(const EventSet& set, double t, double s) {
  if (!(s >= 0.0) || s > t || t > set.box().horizon) {
    fail(ErrorCode::invalid_argument, "path window requires 0 <= s <= t <= horizon, got s=" +
                                          format_double(s) + " t=" + format_double(t));
  }
}

std::vector<Height> boundary_values(const EventSet& set, const InitialCondition& init, double s,
                                    const Model& model) {
  if (s == 0.0) {
    auto h = init.materialize(set.geometry());
    check_admissible(set.geometry(), h, model);
    return h;
  }
  EvolveOptions opts;
  opts.record_log = false;
  return evolve(set, init, model, s, opts).field.heights;
}

struct DpResult {
  std::vector<Height> current;
  std::vector<std::uint8_t> choice;  // by event slot
};

DpResult run_dp(const EventSet& set, std::vector<Height> boundary, double s, double t, const Model& model,
                bool record_choice) {
  DpResult r;
  r.current = std::move(boundary);
  if (record_choice) r.choice.assign(set.size(), 0);
  const auto& geom = set.geometry();
  const bool maximize = model.kind == ModelKind::bd;
  const Height move_cost = model.kind == ModelKind::krsos ? model.k : 1;
  const auto events = set.events();
  for (std::size_t i = set.upper_bound(s); i < events.size() && events[i].time <= t; ++i) {
    const Event& e = events[i];
    Height best = 1 + r.current[e.site];
    std::uint8_t dir = 0;
    const auto nbrs = geom.neighbors(e.site);
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      if (nbrs[a] < 0) continue;
      const Height c = move_cost + r.current[static_cast<std::size_t>(nbrs[a])];
      if (maximize ? c > best : c < best) {
        best = c;
        dir = static_cast<std::uint8_t>(a + 1);
      }
    }
    r.current[e.site] = best;
    if (record_choice) r.choice[e.slot] = dir;
  }
  return r;
}

Height min_initial(const EventSet& set, const InitialCondition& init) {
  const auto h = init.materialize(set.geometry());
  return h.empty() ? 0 : *std::min_element(h.begin(), h.end());
}

}  // namespace

void validate_path(const EventSet& set, const PathTrace& path) {
  const auto& box = set.box();
  auto bad = [](const std::string& what) { fail(ErrorCode::invalid_argument, "invalid path: " + what); };
  if (!box.contains(path.start.site)) bad("start outside the box");
  if (path.end_time > path.start.time) bad("end time after start time");
  Site cur = path.start.site;
  double prev = path.start.time;
  bool strict = false;
  for (const auto& step : path.steps) {
    if (!(step.time > path.end_time)) bad("step at or before the end time");
    if (strict ? step.time >= prev : step.time > prev) bad("step times not strictly decreasing");
    if (step.site != cur) bad("step at " + step.site.to_string() + " but path is at " + cur.to_string());
    const std::size_t idx = box.index_of(cur);
    const auto ev = latest_event(set, idx, step.time, prev, strict);
    if (ev) bad("path skips the event at " + format_double(set.times_at(idx)[*ev - set.site_offset(idx)]));
    if (!set.contains({step.time, cur})) bad("no event at " + format_double(step.time) + " over " + cur.to_string());
    if (step.move < 0 || step.move > 2 * box.dimension) bad("move index out of range");
    cur = cur + direction_offset(box.dimension, step.move);
    if (!box.contains(cur)) bad("move leaves the box");
    prev = step.time;
    strict = true;
  }
  if (latest_event(set, box.index_of(cur), path.end_time, prev, strict)) bad("path skips an event before its end");
}

bool on_path(const PathTrace& path, const SpaceTimePoint& p) {
  if (p.time > path.start.time || p.time < path.end_time) return false;
  return path.position_at(p.time) == p.site;
}

void write_json(std::ostream& out, const PathTrace& path) {
  auto site_json = [&](const Site& s) {
    out << "[";
    for (int a = 0; a < s.dimension(); ++a) out << (a ? "," : "") << s[a];
    out << "]";
  };
  out << "{\"start\":{\"t\":" << format_double(path.start.time) << ",\"x\":";
  site_json(path.start.site);
  out << "},\"end_time\":" << format_double(path.end_time) << ",\"steps\":[";
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& step = path.steps[i];
    out << (i ? "," : "") << "{\"t\":" << format_double(step.time) << ",\"x\":";
    site_json(step.site);
    out << ",\"move\":";
    site_json(direction_offset(step.site.dimension(), step.move));
    out << "}";
  }
  out << "],\"weight\":" << path.weight() << "}";
}

std::vector<Height> path_values(const EventSet& set, double t, const InitialCondition& init, double s,
                                const Model& model) {
  check_window(set, t, s);
  return run_dp(set, boundary_values(set, init, s, model), s, t, model, false).current;
}

bool certify(const LatticeBox& box, const Site& x, Height value, Height boundary_min, const Model& model) {
  // A path leaving the box makes at least edge_distance + 1 lateral moves,
  // each on its own event.
  const Height exits = box.edge_distance(x) + 1;
  switch (model.kind) {
    case ModelKind::rsos: return value <= exits + boundary_min;
    case ModelKind::krsos: return value <= model.k * exits + boundary_min;
    case ModelKind::bd: return value < exits + boundary_min;
  }
  return false;
}

PathValue min_weight(const EventSet& set, double t, const Site& x, const InitialCondition& init, double s,
                     const Model& model) {
  const std::size_t idx = set.box().index_of(x);
  const auto values = path_values(set, t, init, s, model);
  PathValue r;
  r.value = values[idx];
  r.exact = certify(set.box(), x, r.value, min_initial(set, init), model);
  return r;
}

PathTrace argmin_path(const EventSet& set, double t, const Site& x, const InitialCondition& init, double s,
                      const Model& model) {
  check_window(set, t, s);
  std::size_t pos = set.box().index_of(x);
  const auto dp = run_dp(set, boundary_values(set, init, s, model), s, t, model, true);
  const auto& geom = set.geometry();
  PathTrace path;
  path.start = {t, x};
  path.end_time = s;
  double tau = t;
  bool strict = false;
  while (auto slot = latest_event(set, pos, s, tau, strict)) {
    tau = set.times_at(pos)[*slot - set.site_offset(pos)];
    const int dir = dp.choice[*slot];
    path.steps.push_back({tau, geom.site(pos), dir});
    if (dir != 0) pos = static_cast<std::size_t>(geom.neighbors(pos)[static_cast<std::size_t>(dir - 1)]);
    strict = true;
  }
  return path;
}

std::uint64_t enumerate_paths(const EventSet& set, double t, const Site& x, double s,
                              const std::function<void(const PathTrace&)>& visit, std::size_t cap) {
  check_window(set, t, s);
  const std::size_t n = set.count_between(s, t);
  if (n > cap) {
    fail(ErrorCode::resource_limit, "path enumeration refused: " + std::to_string(n) +
                                        " events in the window exceed the cap of " + std::to_string(cap));
  }
  const auto& geom = set.geometry();
  PathTrace path;
  path.start = {t, x};
  path.end_time = s;
  std::uint64_t count = 0;
  std::function<void(std::size_t, double, bool)> walk = [&](std::size_t pos, double tau, bool strict) {
    const auto slot = latest_event(set, pos, s, tau, strict);
    if (!slot) {
      ++count;
      visit(path);
      return;
    }
    const double when = set.times_at(pos)[*slot - set.site_offset(pos)];
    const auto nbrs = geom.neighbors(pos);
    for (int dir = 0; dir <= static_cast<int>(nbrs.size()); ++dir) {
      const std::int32_t next = dir == 0 ? static_cast<std::int32_t>(pos) : nbrs[static_cast<std::size_t>(dir - 1)];
      if (next < 0) continue;
      path.steps.push_back({when, geom.site(pos), dir});
      walk(static_cast<std::size_t>(next), when, true);
      path.steps.pop_back();
    }
  };
  walk(set.box().index_of(x), t, false);
  return count;
}

Height perturb_height(const EventSet& set, const SpaceTimePoint& p, double t, const Site& x,
                      const InitialCondition& init) {
  const EventSet perturbed = insert_event(set, p);
  return min_weight(perturbed, t, x, init).value - min_weight(set, t, x, init).value;
}

}  // namespace rsos
