#include "core/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "core/error.hpp"

namespace rsos {

const char* to_string(RadiusLaw law) noexcept {
  return law == RadiusLaw::foundation_consistent ? "foundation_consistent" : "wide_center";
}

RadiusLaw parse_radius_law(const std::string& text) {
  if (text == "foundation_consistent") return RadiusLaw::foundation_consistent;
  if (text == "wide_center") return RadiusLaw::wide_center;
  fail(ErrorCode::parse, "unknown radius law '" + text + "'");
}

std::size_t Pyramid::event_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

int layer_radius(PyramidKind kind, RadiusLaw law, int height, int layer) {
  const int extra = law == RadiusLaw::wide_center ? 1 : 0;
  return kind == PyramidKind::pyramid ? height - layer + extra : layer - 1 + extra;
}

namespace {

/// Whether an event at `later` (layer k) must come after one at `earlier`
/// (layer k - 1).
bool constrained(const LatticeBox& box, PyramidKind kind, RadiusLaw law, const Site& center, const Site& later,
                 const Site& earlier) {
  if (law == RadiusLaw::foundation_consistent) return box.distance(later, earlier) <= 1;
  return box.distance(kind == PyramidKind::pyramid ? earlier : later, center) <= 1;
}

std::vector<std::size_t> ball_sites(const BoxGeometry& geom, const Site& center, int radius) {
  std::vector<std::size_t> out;
  if (radius < 0) return out;
  for (std::size_t i = 0; i < geom.site_count(); ++i) {
    if (geom.box().distance(geom.site(i), center) <= radius) out.push_back(i);
  }
  return out;
}

double before(double t) { return std::nextafter(t, -std::numeric_limits<double>::infinity()); }

}  // namespace

bool validate_pyramid(const LatticeBox& box, const Pyramid& p, std::string* why) {
  auto reject = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (p.height < 0 || static_cast<int>(p.layers.size()) != p.height) {
    return reject("layer count does not match the height");
  }
  if (p.height == 0) return true;
  if (!box.contains(p.center)) return reject("center outside the box");
  const BoxGeometry geom(box);
  for (int k = 1; k <= p.height; ++k) {
    const auto& layer = p.layers[static_cast<std::size_t>(k - 1)];
    std::vector<std::size_t> locations;
    for (const auto& u : layer) {
      if (!box.contains(u.site)) return reject("event outside the box in layer " + std::to_string(k));
      if (!(u.time > 0.0) || !(u.time < p.within)) {
        return reject("event time " + format_double(u.time) + " not within (0, " + format_double(p.within) + ")");
      }
      locations.push_back(box.index_of(u.site));
    }
    std::sort(locations.begin(), locations.end());
    locations.erase(std::unique(locations.begin(), locations.end()), locations.end());
    if (locations != ball_sites(geom, p.center, layer_radius(p.kind, p.law, p.height, k))) {
      return reject("layer " + std::to_string(k) + " does not cover exactly its ball");
    }
    if (k == 1) continue;
    for (const auto& u : layer) {
      for (const auto& v : p.layers[static_cast<std::size_t>(k - 2)]) {
        if (constrained(box, p.kind, p.law, p.center, u.site, v.site) && !(v.time < u.time)) {
          return reject("event at " + u.site.to_string() + " in layer " + std::to_string(k) +
                        " does not follow the event at " + v.site.to_string() + " in layer " +
                        std::to_string(k - 1));
        }
      }
    }
  }
  return true;
}

bool validate_against(const EventSet& set, const Pyramid& p, std::string* why) {
  if (!validate_pyramid(set.box(), p, why)) return false;
  for (const auto& layer : p.layers) {
    for (const auto& u : layer) {
      if (!set.contains(u)) {
        if (why) *why = "event at " + u.site.to_string() + " time " + format_double(u.time) + " is not in the set";
        return false;
      }
    }
  }
  return true;
}

Pyramid reverse_pyramid(const Pyramid& p) {
  Pyramid r = p;
  r.kind = p.kind == PyramidKind::pyramid ? PyramidKind::dual : PyramidKind::pyramid;
  std::reverse(r.layers.begin(), r.layers.end());
  for (auto& layer : r.layers) {
    for (auto& u : layer) u.time = p.within - u.time;
  }
  return r;
}

Pyramid pushdown(const EventSet& set, const Pyramid& p) {
  std::string why;
  if (!validate_against(set, p, &why)) fail(ErrorCode::invalid_argument, "pushdown of an invalid pyramid: " + why);
  const auto& box = set.box();
  Pyramid out = p;
  if (p.height == 0) return out;

  auto first_after = [&](const Site& site, double t0) {
    const auto times = set.times_at(box.index_of(site));
    const auto it = std::upper_bound(times.begin(), times.end(), t0);
    if (it == times.end() || !(*it < p.within)) {
      fail(ErrorCode::invalid_argument, "pushdown found no event at " + site.to_string() + " after " +
                                            format_double(t0));
    }
    return SpaceTimePoint{*it, site};
  };
  auto dedupe = [](std::vector<SpaceTimePoint>& layer) {
    std::sort(layer.begin(), layer.end(), [](const auto& a, const auto& b) {
      return a.time < b.time || (a.time == b.time && a.site < b.site);
    });
    layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
  };

  std::vector<SpaceTimePoint> first;
  for (const auto& u : p.layers[0]) first.push_back(first_after(u.site, 0.0));
  dedupe(first);
  out.layers[0] = first;
  for (int k = 2; k <= p.height; ++k) {
    std::vector<SpaceTimePoint> next;
    for (const auto& u : p.layers[static_cast<std::size_t>(k - 1)]) {
      double t0 = 0.0;
      for (const auto& v : out.layers[static_cast<std::size_t>(k - 2)]) {
        if (constrained(box, p.kind, p.law, p.center, u.site, v.site)) t0 = std::max(t0, v.time);
      }
      next.push_back(first_after(u.site, t0));
    }
    dedupe(next);
    out.layers[static_cast<std::size_t>(k - 1)] = std::move(next);
  }
  return out;
}

Pyramid extract_pyramid(const AcceptedLog& log, const Site& x, double t) {
  const auto& geom = log.geometry();
  const std::size_t xi = geom.index_of(x);
  Pyramid p;
  p.center = x;
  p.within = t;
  Height h = 0;
  for (std::uint32_t i : log.at_site(xi)) {
    if (log.entries()[i].time < t) h = log.entries()[i].new_height;
  }
  p.height = static_cast<int>(h);
  for (int k = 1; k <= p.height; ++k) {
    std::vector<SpaceTimePoint> layer;
    for (std::size_t y : ball_sites(geom, x, p.height - k)) {
      const auto u = log.find_height(y, k);
      if (!u || !(log.entries()[*u].time < t)) {
        fail(ErrorCode::not_found, "accepted log lacks the height-" + std::to_string(k) + " update at " +
                                       geom.site(y).to_string() + " (not a zero-initialized RSOS log?)");
      }
      layer.push_back(log.point(*u));
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Pyramid extract_dual_pyramid(const AcceptedLog& log, double t) {
  const auto& geom = log.geometry();
  Pyramid p;
  p.kind = PyramidKind::dual;
  p.center = Site(geom.dimension());
  p.within = t;
  Height h = std::numeric_limits<Height>::max();
  for (std::size_t y = 0; y < geom.site_count(); ++y) {
    Height f = geom.site(y).l1_norm();
    for (std::uint32_t i : log.at_site(y)) {
      if (log.entries()[i].time < t) f = log.entries()[i].new_height;
    }
    h = std::min(h, f);
  }
  p.height = static_cast<int>(h);
  for (int k = 1; k <= p.height; ++k) {
    std::vector<SpaceTimePoint> layer;
    for (std::size_t y : ball_sites(geom, p.center, k - 1)) {
      const auto u = log.find_height(y, k);
      if (!u || !(log.entries()[*u].time < t)) {
        fail(ErrorCode::not_found, "accepted log lacks the height-" + std::to_string(k) + " update at " +
                                       geom.site(y).to_string() + " (not a dual RSOS log?)");
      }
      layer.push_back(log.point(*u));
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

std::size_t enumerate_pyramids(const EventSet& set, PyramidKind kind, RadiusLaw law, const Site& x, double t,
                               int h, const std::function<bool(const Pyramid&)>& visit) {
  const auto& geom = set.geometry();
  const auto& box = set.box();
  const std::size_t n = set.upper_bound(before(t));
  if (n > kPyramidBruteForceCap) {
    fail(ErrorCode::resource_limit, "pyramid search refused: " + std::to_string(n) +
                                        " events exceed the cap of " + std::to_string(kPyramidBruteForceCap));
  }
  Pyramid p;
  p.kind = kind;
  p.law = law;
  p.center = x;
  p.height = h;
  p.within = t;
  if (h == 0) {
    visit(p);
    return 1;
  }

  // Flattened slots in layer order; each slot lists the earlier slots it must follow.
  struct Slot {
    std::size_t site;
    int layer;
    std::vector<std::size_t> after;
  };
  std::vector<Slot> slots;
  std::vector<std::size_t> layer_begin;
  for (int k = 1; k <= h; ++k) {
    layer_begin.push_back(slots.size());
    for (std::size_t y : ball_sites(geom, x, layer_radius(kind, law, h, k))) {
      Slot s{y, k, {}};
      if (k > 1) {
        for (std::size_t j = layer_begin[static_cast<std::size_t>(k - 2)]; j < layer_begin.back(); ++j) {
          if (constrained(box, kind, law, x, geom.site(y), geom.site(slots[j].site))) s.after.push_back(j);
        }
      }
      slots.push_back(std::move(s));
    }
  }
  if (slots.size() > n) return 0;

  std::vector<double> chosen(slots.size(), 0.0);
  std::size_t count = 0;
  bool stop = false;
  std::function<void(std::size_t)> place = [&](std::size_t j) {
    if (stop) return;
    if (j == slots.size()) {
      p.layers.assign(static_cast<std::size_t>(h), {});
      for (std::size_t i = 0; i < slots.size(); ++i) {
        p.layers[static_cast<std::size_t>(slots[i].layer - 1)].push_back({chosen[i], geom.site(slots[i].site)});
      }
      ++count;
      if (!visit(p)) stop = true;
      return;
    }
    double lower = 0.0;
    for (std::size_t i : slots[j].after) lower = std::max(lower, chosen[i]);
    for (double tau : set.times_at(slots[j].site)) {
      if (!(tau < t)) break;
      if (tau <= lower) continue;
      chosen[j] = tau;
      place(j + 1);
      if (stop) return;
    }
  };
  place(0);
  return count;
}

namespace {

int brute_force_height(const EventSet& set, PyramidKind kind, RadiusLaw law, const Site& x, double t) {
  int h = 0;
  for (;;) {
    const auto found = enumerate_pyramids(set, kind, law, x, t, h + 1, [](const Pyramid&) { return false; });
    if (found == 0) return h;
    ++h;
  }
}

}  // namespace

int max_pyramid_height(const EventSet& set, const Site& x, double t, PyramidMethod method, RadiusLaw law) {
  if (method == PyramidMethod::brute_force) return brute_force_height(set, PyramidKind::pyramid, law, x, t);
  if (law != RadiusLaw::foundation_consistent) {
    fail(ErrorCode::unsupported, "via_rsos characterizes foundation_consistent pyramids only");
  }
  EvolveOptions opts;
  opts.record_log = false;
  return static_cast<int>(evolve(set, InitialCondition::zero(), Model::rsos(), before(t), opts).field.at(x));
}

int max_dual_pyramid_height(const EventSet& set, const Site& x, double t, PyramidMethod method, RadiusLaw law) {
  if (method == PyramidMethod::brute_force) return brute_force_height(set, PyramidKind::dual, law, x, t);
  if (law != RadiusLaw::foundation_consistent || x != Site(set.box().dimension)) {
    fail(ErrorCode::unsupported, "via_rsos dual characterization needs the origin and foundation_consistent");
  }
  EvolveOptions opts;
  opts.record_log = false;
  const auto field = evolve(set, InitialCondition::well(), Model::rsos(), before(t), opts).field;
  return static_cast<int>(*std::min_element(field.heights.begin(), field.heights.end()));
}

void write_json(std::ostream& out, const Pyramid& p) {
  auto site_json = [&](const Site& s) {
    out << "[";
    for (int a = 0; a < s.dimension(); ++a) out << (a ? "," : "") << s[a];
    out << "]";
  };
  out << "{\"center\":";
  site_json(p.center);
  out << ",\"height\":" << p.height << ",\"layers\":[";
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    out << (k ? "," : "") << "[";
    for (std::size_t i = 0; i < p.layers[k].size(); ++i) {
      out << (i ? "," : "") << "{\"t\":" << format_double(p.layers[k][i].time) << ",\"x\":";
      site_json(p.layers[k][i].site);
      out << "}";
    }
    out << "]";
  }
  out << "]}";
}

}  // namespace rsos
