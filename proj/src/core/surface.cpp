#include "core/surface.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <ostream>

#include "core/error.hpp"

namespace rsos {

Model Model::krsos(int k) {
  if (k < 1) fail(ErrorCode::invalid_argument, "k-RSOS requires k >= 1, got " + std::to_string(k));
  return {ModelKind::krsos, k};
}

int Model::lipschitz() const noexcept {
  switch (kind) {
    case ModelKind::rsos: return 1;
    case ModelKind::krsos: return k;
    case ModelKind::bd: return -1;
  }
  return -1;
}

std::string Model::name() const {
  switch (kind) {
    case ModelKind::rsos: return "rsos";
    case ModelKind::krsos: return "krsos:" + std::to_string(k);
    case ModelKind::bd: return "bd";
  }
  return "?";
}

namespace {

int parse_int(std::string_view text, const std::string& what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    fail(ErrorCode::parse, "bad integer '" + std::string(text) + "' in " + what);
  }
  return value;
}

}  // namespace

Model parse_model(const std::string& text) {
  if (text == "rsos") return Model::rsos();
  if (text == "bd") return Model::bd();
  if (text == "krsos") return Model::krsos(1);
  if (text.rfind("krsos:", 0) == 0) return Model::krsos(parse_int(text.substr(6), "model"));
  fail(ErrorCode::parse, "unknown model '" + text + "' (expected rsos, krsos:K or bd)");
}

// ---------------------------------------------------------------------------

InitialCondition InitialCondition::explicit_heights(std::map<Site, Height> values) {
  return {InitKind::explicit_values, std::move(values)};
}

Height InitialCondition::at(const Site& site) const {
  switch (kind) {
    case InitKind::zero: return 0;
    case InitKind::well: return site.l1_norm();
    case InitKind::explicit_values: {
      auto it = values.find(site);
      return it == values.end() ? 0 : it->second;
    }
  }
  return 0;
}

std::vector<Height> InitialCondition::materialize(const BoxGeometry& geometry) const {
  std::vector<Height> h(geometry.site_count(), 0);
  if (kind == InitKind::explicit_values) {
    for (const auto& [site, value] : values) {
      if (!geometry.box().contains(site)) {
        fail(ErrorCode::out_of_box, "initial height given at " + site.to_string() + " outside the box");
      }
    }
  }
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = at(geometry.site(i));
  return h;
}

std::string InitialCondition::name() const {
  switch (kind) {
    case InitKind::zero: return "zero";
    case InitKind::well: return "well";
    case InitKind::explicit_values: return "explicit";
  }
  return "?";
}

// Format: zero | well | explicit:x1,..,xd=h;x1,..,xd=h;...
InitialCondition parse_init(const std::string& text) {
  if (text == "zero") return InitialCondition::zero();
  if (text == "well") return InitialCondition::well();
  if (text.rfind("explicit:", 0) != 0) {
    fail(ErrorCode::parse, "unknown initial condition '" + text + "'");
  }
  std::map<Site, Height> values;
  std::string_view rest(text);
  rest.remove_prefix(9);
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const auto item = rest.substr(0, semi);
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::parse, "explicit entry '" + std::string(item) + "' lacks '='");
    std::vector<int> coords;
    auto sv = item.substr(0, eq);
    while (!sv.empty()) {
      const auto comma = sv.find(',');
      coords.push_back(parse_int(sv.substr(0, comma), "explicit site"));
      sv = comma == std::string_view::npos ? std::string_view{} : sv.substr(comma + 1);
    }
    values[Site::from(coords)] = parse_int(item.substr(eq + 1), "explicit height");
  }
  return InitialCondition::explicit_heights(std::move(values));
}

void check_admissible(const BoxGeometry& geometry, std::span<const Height> heights, const Model& model) {
  const int bound = model.lipschitz();
  if (bound < 0) return;
  for (std::size_t i = 0; i < geometry.site_count(); ++i) {
    for (std::int32_t j : geometry.neighbors(i)) {
      if (j < 0) continue;
      const Height diff = heights[i] - heights[static_cast<std::size_t>(j)];
      if (diff > bound || -diff > bound) {
        fail(ErrorCode::inadmissible,
             "initial heights at " + geometry.site(i).to_string() + " (" + std::to_string(heights[i]) +
                 ") and " + geometry.site(static_cast<std::size_t>(j)).to_string() + " (" +
                 std::to_string(heights[static_cast<std::size_t>(j)]) + ") differ by more than " +
                 std::to_string(bound) + " for model " + model.name());
      }
    }
  }
}

// ---------------------------------------------------------------------------

Surface::Surface(std::shared_ptr<const BoxGeometry> geometry, Model model, std::vector<Height> heights)
    : geometry_(std::move(geometry)), model_(model), heights_(std::move(heights)) {
  if (heights_.size() != geometry_->site_count()) {
    fail(ErrorCode::invalid_argument, "height vector does not match the box");
  }
  check_admissible(*geometry_, heights_, model_);
}

Height Surface::proposal(std::size_t site) const noexcept {
  const Height f = heights_[site];
  const auto nbrs = geometry_->neighbors(site);
  switch (model_.kind) {
    case ModelKind::rsos:
      for (std::int32_t j : nbrs) {
        if (j >= 0 && heights_[static_cast<std::size_t>(j)] < f) return f;
      }
      return f + 1;
    case ModelKind::krsos: {
      Height v = f + 1;
      for (std::int32_t j : nbrs) {
        if (j >= 0) v = std::min(v, model_.k + heights_[static_cast<std::size_t>(j)]);
      }
      return v;
    }
    case ModelKind::bd: {
      Height v = f + 1;
      for (std::int32_t j : nbrs) {
        if (j >= 0) v = std::max(v, 1 + heights_[static_cast<std::size_t>(j)]);
      }
      return v;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& out, const HeightField& field) {
  const auto& box = field.box;
  if (box.dimension == 1) {
    out << "site,height\n";
    for (std::size_t i = 0; i < field.heights.size(); ++i) {
      out << box.site_at(i)[0] << "," << field.heights[i] << "\n";
    }
  } else if (box.dimension == 2) {
    out << "y\\x";
    for (int x = -box.radius; x <= box.radius; ++x) out << "," << x;
    out << "\n";
    for (int y = -box.radius; y <= box.radius; ++y) {
      out << y;
      for (int x = -box.radius; x <= box.radius; ++x) out << "," << field.at(Site{x, y});
      out << "\n";
    }
  } else {
    for (int a = 0; a < box.dimension; ++a) out << "x" << a + 1 << ",";
    out << "height\n";
    for (std::size_t i = 0; i < field.heights.size(); ++i) {
      const Site s = box.site_at(i);
      for (int a = 0; a < box.dimension; ++a) out << s[a] << ",";
      out << field.heights[i] << "\n";
    }
  }
}

AcceptedLog::AcceptedLog(std::shared_ptr<const BoxGeometry> geometry) : geometry_(std::move(geometry)) {
  site_offsets_.assign(geometry_->site_count() + 1, 0);
}

void AcceptedLog::finalize() {
  const std::size_t n = geometry_->site_count();
  site_offsets_.assign(n + 1, 0);
  for (const auto& u : entries_) ++site_offsets_[u.site + 1];
  for (std::size_t i = 0; i < n; ++i) site_offsets_[i + 1] += site_offsets_[i];
  by_site_.assign(entries_.size(), 0);
  std::vector<std::size_t> fill(site_offsets_.begin(), site_offsets_.end() - 1);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    by_site_[fill[entries_[i].site]++] = static_cast<std::uint32_t>(i);
  }
}

std::optional<std::size_t> AcceptedLog::find(double time, std::size_t site) const {
  for (std::uint32_t i : at_site(site)) {
    if (entries_[i].time == time) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> AcceptedLog::find_height(std::size_t site, Height h) const {
  const auto ids = at_site(site);
  const auto it = std::lower_bound(ids.begin(), ids.end(), h, [&](std::uint32_t i, Height v) {
    return entries_[i].new_height < v;
  });
  if (it != ids.end() && entries_[*it].new_height == h) return *it;
  return std::nullopt;
}

void write_jsonl(std::ostream& out, const AcceptedLog& log) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& u = log.entries()[i];
    const Site& s = log.geometry().site(u.site);
    out << "{\"t\":" << format_double(u.time) << ",\"x\":[";
    for (int a = 0; a < s.dimension(); ++a) out << (a ? "," : "") << s[a];
    out << "],\"h\":" << u.new_height << "}\n";
  }
}

// ---------------------------------------------------------------------------

Evolution evolve_from(const EventSet& set, std::vector<Height> heights, const Model& model, double after,
                      double until, const EvolveOptions& options) {
  if (until > set.box().horizon) {
    fail(ErrorCode::invalid_argument, "evolution time " + format_double(until) + " exceeds the horizon " +
                                          format_double(set.box().horizon));
  }
  Surface surface(set.shared_geometry(), model, std::move(heights));
  Evolution result;
  result.log = AcceptedLog(set.shared_geometry());

  std::vector<double> snaps = options.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  if (!snaps.empty() && (snaps.front() < after || snaps.back() > until)) {
    fail(ErrorCode::invalid_argument, "snapshot times must lie in the evolution window");
  }
  std::size_t next_snap = 0;
  auto take_snapshots = [&](double before) {
    while (next_snap < snaps.size() && snaps[next_snap] < before) {
      result.snapshots.push_back({set.box(), snaps[next_snap],
                                  std::vector<Height>(surface.heights().begin(), surface.heights().end())});
      ++next_snap;
    }
  };

  const auto events = set.events();
  for (std::size_t i = set.upper_bound(after); i < events.size() && events[i].time <= until; ++i) {
    const Event& e = events[i];
    take_snapshots(e.time);
    if (surface.apply(e.site) && options.record_log) {
      result.log.push({e.time, e.site, surface.height(e.site)});
    }
  }
  take_snapshots(std::numeric_limits<double>::infinity());
  result.log.finalize();
  result.field = {set.box(), until, std::vector<Height>(surface.heights().begin(), surface.heights().end())};
  return result;
}

Evolution evolve(const EventSet& set, const InitialCondition& init, const Model& model, double until,
                 const EvolveOptions& options) {
  return evolve_from(set, init.materialize(set.geometry()), model, 0.0, until, options);
}

std::vector<std::size_t> foundation(const AcceptedLog& log, std::size_t u) {
  if (u >= log.size()) fail(ErrorCode::not_found, "accepted update index out of range");
  const AcceptedUpdate& top = log.entries()[u];
  std::vector<std::size_t> out;
  auto take = [&](std::size_t site) {
    if (auto v = log.find_height(site, top.new_height - 1)) out.push_back(*v);
  };
  take(top.site);
  for (std::int32_t j : log.geometry().neighbors(top.site)) {
    if (j >= 0) take(static_cast<std::size_t>(j));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rsos
