#include "core/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rsos {

// ---------------------------------------------------------------------------
// Site

Site::Site(int dimension) : dimension_(dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    fail(ErrorCode::invalid_argument, "site dimension must be in [1, " +
                                          std::to_string(kMaxDimension) + "], got " +
                                          std::to_string(dimension));
  }
}

Site::Site(std::initializer_list<int> coords) : Site(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), coords_.begin());
}

Site Site::from(std::span<const int> coords) {
  Site s(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), s.coords_.begin());
  return s;
}

int Site::l1_norm() const noexcept {
  int n = 0;
  for (int i = 0; i < dimension_; ++i) n += std::abs(coords_[static_cast<std::size_t>(i)]);
  return n;
}

int Site::linf_norm() const noexcept {
  int n = 0;
  for (int i = 0; i < dimension_; ++i) n = std::max(n, std::abs(coords_[static_cast<std::size_t>(i)]));
  return n;
}

std::string Site::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dimension_; ++i) {
    if (i) s += ",";
    s += std::to_string((*this)[i]);
  }
  return s + ")";
}

Site operator+(const Site& a, const Site& b) {
  Site r = a;
  for (int i = 0; i < a.dimension(); ++i) r[i] += b[i];
  return r;
}

Site operator-(const Site& a, const Site& b) {
  Site r = a;
  for (int i = 0; i < a.dimension(); ++i) r[i] -= b[i];
  return r;
}

// ---------------------------------------------------------------------------
// LatticeBox

const char* to_string(Boundary boundary) noexcept {
  return boundary == Boundary::free ? "free" : "periodic";
}

Boundary parse_boundary(const std::string& text) {
  if (text == "free") return Boundary::free;
  if (text == "periodic") return Boundary::periodic;
  fail(ErrorCode::parse, "unknown boundary mode '" + text + "' (expected free or periodic)");
}

void LatticeBox::validate() const {
  if (dimension < 1 || dimension > kMaxDimension) {
    fail(ErrorCode::invalid_argument, "box dimension must be in [1, " +
                                          std::to_string(kMaxDimension) + "]");
  }
  if (radius < 1) fail(ErrorCode::invalid_argument, "box radius must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    fail(ErrorCode::invalid_argument, "box horizon must be a positive finite time");
  }
  double sites = std::pow(static_cast<double>(side()), dimension);
  if (sites > 2.0e9) fail(ErrorCode::resource_limit, "box has more than 2e9 sites");
}

std::size_t LatticeBox::site_count() const {
  std::size_t n = 1;
  for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(side());
  return n;
}

bool LatticeBox::contains(const Site& site) const noexcept {
  if (site.dimension() != dimension) return false;
  for (int i = 0; i < dimension; ++i) {
    if (site[i] < -radius || site[i] > radius) return false;
  }
  return true;
}

std::size_t LatticeBox::index_of(const Site& site) const {
  if (!contains(site)) {
    fail(ErrorCode::out_of_box, "site " + site.to_string() + " is outside the box of radius " +
                                    std::to_string(radius) + " in dimension " +
                                    std::to_string(dimension));
  }
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dimension; ++i) {
    index += static_cast<std::size_t>(site[i] + radius) * stride;
    stride *= static_cast<std::size_t>(side());
  }
  return index;
}

Site LatticeBox::site_at(std::size_t index) const {
  Site s(dimension);
  for (int i = 0; i < dimension; ++i) {
    s[i] = static_cast<int>(index % static_cast<std::size_t>(side())) - radius;
    index /= static_cast<std::size_t>(side());
  }
  return s;
}

int LatticeBox::distance(const Site& a, const Site& b) const {
  int d = 0;
  for (int i = 0; i < dimension; ++i) {
    int delta = std::abs(a[i] - b[i]);
    if (boundary == Boundary::periodic) delta = std::min(delta, side() - delta);
    d += delta;
  }
  return d;
}

int LatticeBox::edge_distance(const Site& site) const { return radius - site.linf_norm(); }

double LatticeBox::time_quantum() const { return std::ldexp(1.0, std::ilogb(horizon) - 52); }

double LatticeBox::snap_time(double t) const {
  const double q = time_quantum();
  return std::nearbyint(t / q) * q;
}

// ---------------------------------------------------------------------------
// BoxGeometry

BoxGeometry::BoxGeometry(const LatticeBox& box) : box_(box) {
  box_.validate();
  const std::size_t n = box_.site_count();
  const int d = box_.dimension;
  sites_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sites_.push_back(box_.site_at(i));
  neighbors_.assign(n * static_cast<std::size_t>(2 * d), -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int axis = 0; axis < d; ++axis) {
      for (int sign = 0; sign < 2; ++sign) {
        Site y = sites_[i];
        y[axis] += sign == 0 ? 1 : -1;
        if (box_.boundary == Boundary::periodic) {
          if (y[axis] > box_.radius) y[axis] = -box_.radius;
          if (y[axis] < -box_.radius) y[axis] = box_.radius;
        }
        if (box_.contains(y)) {
          neighbors_[i * static_cast<std::size_t>(2 * d) + static_cast<std::size_t>(2 * axis + sign)] =
              static_cast<std::int32_t>(box_.index_of(y));
        }
      }
    }
  }
  origin_ = static_cast<int>(box_.index_of(Site(d)));
}

std::shared_ptr<const BoxGeometry> make_geometry(const LatticeBox& box) {
  return std::make_shared<const BoxGeometry>(box);
}

Site direction_offset(int dimension, int dir) {
  Site s(dimension);
  if (dir > 0) {
    const int axis = (dir - 1) / 2;
    s[axis] = (dir - 1) % 2 == 0 ? 1 : -1;
  }
  return s;
}

// ---------------------------------------------------------------------------
// EventSet

namespace {

bool event_before(const Event& a, const Event& b) {
  return a.time < b.time || (a.time == b.time && a.site < b.site);
}

void check_time(const LatticeBox& box, double t) {
  if (!(t > 0.0) || t > box.horizon) {
    fail(ErrorCode::out_of_box, "event time " + format_double(t) + " outside (0, " +
                                    format_double(box.horizon) + "]");
  }
}

}  // namespace

EventSet::EventSet(const LatticeBox& box) : geometry_(make_geometry(box)) {
  build_from_sorted({});
}

EventSet::EventSet(const LatticeBox& box, std::span<const SpaceTimePoint> points)
    : geometry_(make_geometry(box)) {
  std::vector<Event> events;
  events.reserve(points.size());
  for (const auto& p : points) {
    const double t = box.snap_time(p.time);
    check_time(box, t);
    events.push_back({t, static_cast<std::uint32_t>(box.index_of(p.site)), 0});
  }
  std::sort(events.begin(), events.end(), event_before);
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].time == events[i - 1].time) {
      fail(ErrorCode::duplicate_time,
           "two events share time " + format_double(events[i].time));
    }
  }
  build_from_sorted(std::move(events));
}

void EventSet::build_from_sorted(std::vector<Event> events) {
  const std::size_t n_sites = geometry_->site_count();
  site_offsets_.assign(n_sites + 1, 0);
  for (const auto& e : events) ++site_offsets_[e.site + 1];
  for (std::size_t i = 0; i < n_sites; ++i) site_offsets_[i + 1] += site_offsets_[i];
  site_times_.assign(events.size(), 0.0);
  std::vector<std::size_t> fill(site_offsets_.begin(), site_offsets_.end() - 1);
  for (auto& e : events) {
    const std::size_t slot = fill[e.site]++;
    site_times_[slot] = e.time;
    e.slot = static_cast<std::uint32_t>(slot);
  }
  events_ = std::move(events);
}

std::vector<SpaceTimePoint> EventSet::points() const {
  std::vector<SpaceTimePoint> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(point(e));
  return out;
}

bool EventSet::contains(const SpaceTimePoint& p) const {
  if (!box().contains(p.site)) return false;
  const auto times = times_at(box().index_of(p.site));
  const double t = box().snap_time(p.time);
  return std::binary_search(times.begin(), times.end(), t);
}

std::size_t EventSet::count_at(std::size_t site, double until) const {
  const auto times = times_at(site);
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), until) - times.begin());
}

std::size_t EventSet::upper_bound(double t) const {
  return static_cast<std::size_t>(
      std::upper_bound(events_.begin(), events_.end(), t,
                       [](double v, const Event& e) { return v < e.time; }) -
      events_.begin());
}

std::size_t EventSet::count_between(double after, double until) const {
  if (until <= after) return 0;
  return upper_bound(until) - upper_bound(after);
}

bool operator==(const EventSet& a, const EventSet& b) {
  if (!(a.box() == b.box()) || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.events_[i].time != b.events_[i].time || a.events_[i].site != b.events_[i].site) return false;
  }
  return true;
}

EventSet generate(const LatticeBox& box, double rate, std::uint64_t seed,
                  const GenerateOptions& options) {
  box.validate();
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(ErrorCode::invalid_argument, "clock rate must be positive, got " + format_double(rate));
  }
  const double expected = static_cast<double>(box.site_count()) * box.horizon * rate;
  if (expected > options.max_expected_events) {
    fail(ErrorCode::resource_limit,
         "expected " + format_double(expected) + " events exceeds the budget of " +
             format_double(options.max_expected_events));
  }

  EventSet set(box);
  const auto& geom = set.geometry();
  const Stream lattice = Stream(seed).child(kLatticeStream).child(static_cast<std::uint64_t>(box.dimension));
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected) + 16.0));
  for (std::size_t i = 0; i < geom.site_count(); ++i) {
    Stream s = lattice;
    for (int c : geom.site(i).coords()) s = s.child(static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    double t = 0.0;
    for (;;) {
      t += s.exponential(rate);
      if (t >= box.horizon) break;
      events.push_back({box.snap_time(t), static_cast<std::uint32_t>(i), 0});
    }
  }
  std::sort(events.begin(), events.end(), event_before);

  // Ties and snapping onto the window ends have probability ~1e-16 per event;
  // colliding draws are replaced by fresh uniform times.
  Stream redraw = Stream(seed).child(kCollisionStream);
  for (;;) {
    bool clean = true;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const bool tie = i > 0 && events[i].time == events[i - 1].time;
      if (tie || events[i].time <= 0.0 || events[i].time >= box.horizon) {
        events[i].time = box.snap_time(redraw.uniform() * box.horizon);
        clean = false;
      }
    }
    if (clean) break;
    std::sort(events.begin(), events.end(), event_before);
  }
  set.build_from_sorted(std::move(events));
  set.set_provenance(rate, seed);
  return set;
}

EventSet insert_event(const EventSet& set, const SpaceTimePoint& p) {
  const auto& box = set.box();
  const double t = box.snap_time(p.time);
  check_time(box, t);
  const auto site = static_cast<std::uint32_t>(box.index_of(p.site));
  auto events = std::vector<Event>(set.events().begin(), set.events().end());
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(events.begin(), events.end(), t,
                       [](const Event& e, double v) { return e.time < v; }) -
      events.begin());
  if (pos < events.size() && events[pos].time == t) {
    fail(ErrorCode::duplicate_time, "an event already occurs at time " + format_double(t));
  }
  events.insert(events.begin() + static_cast<std::ptrdiff_t>(pos), Event{t, site, 0});
  EventSet out(set);
  out.build_from_sorted(std::move(events));
  return out;
}

EventSet remove_event(const EventSet& set, const SpaceTimePoint& p) {
  const auto& box = set.box();
  const double t = box.snap_time(p.time);
  auto events = std::vector<Event>(set.events().begin(), set.events().end());
  const auto it = std::find_if(events.begin(), events.end(), [&](const Event& e) {
    return e.time == t && box.contains(p.site) && e.site == box.index_of(p.site);
  });
  if (it == events.end()) {
    fail(ErrorCode::not_found, "no event at time " + format_double(t) + " over site " + p.site.to_string());
  }
  events.erase(it);
  EventSet out(set);
  out.build_from_sorted(std::move(events));
  return out;
}

EventSet reverse(const EventSet& set) {
  const double horizon = set.box().horizon;
  std::vector<Event> events;
  events.reserve(set.size());
  for (auto it = set.events().rbegin(); it != set.events().rend(); ++it) {
    const double t = horizon - it->time;
    if (!(t > 0.0)) {
      fail(ErrorCode::invalid_argument,
           "cannot reverse an event located exactly at the horizon " + format_double(horizon));
    }
    events.push_back({t, it->site, 0});
  }
  EventSet out(set);
  out.build_from_sorted(std::move(events));
  return out;
}

std::int64_t depth(const EventSet& set, const SpaceTimePoint& p, double s) {
  if (p.time <= s) return 0;
  const auto& geom = set.geometry();
  const std::size_t target = geom.index_of(p.site);
  // longest[x]: most events on a path from (now, x) back to time s.
  std::vector<std::int64_t> longest(geom.site_count(), 0);
  const auto events = set.events();
  const std::size_t first = set.upper_bound(s);
  bool target_is_event = false;
  for (std::size_t i = first; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.time >= p.time) {
      target_is_event = e.time == p.time && e.site == target;
      break;
    }
    std::int64_t best = longest[e.site];
    for (std::int32_t y : geom.neighbors(e.site)) {
      if (y >= 0) best = std::max(best, longest[static_cast<std::size_t>(y)]);
    }
    longest[e.site] = best + 1;
  }
  std::int64_t result = longest[target];
  if (target_is_event) {
    for (std::int32_t y : geom.neighbors(target)) {
      if (y >= 0) result = std::max(result, longest[static_cast<std::size_t>(y)]);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_jsonl(std::ostream& out, const EventSet& set) {
  const auto& box = set.box();
  out << "{\"d\":" << box.dimension << ",\"L\":" << box.radius << ",\"T\":" << format_double(box.horizon)
      << ",\"rate\":" << format_double(set.rate()) << ",\"seed\":" << set.seed() << ",\"boundary\":\""
      << to_string(box.boundary) << "\"}\n";
  for (const auto& e : set.events()) {
    out << "{\"t\":" << format_double(e.time) << ",\"x\":[";
    const Site& s = set.geometry().site(e.site);
    for (int i = 0; i < s.dimension(); ++i) out << (i ? "," : "") << s[i];
    out << "]}\n";
  }
}

EventSet read_jsonl(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto parse_line = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + ex.what());
    }
  };
  while (std::getline(in, line) && line.empty()) ++line_no;
  ++line_no;
  if (line.empty()) fail(ErrorCode::parse, "event file has no header line");
  LatticeBox box;
  double rate = 1.0;
  std::uint64_t seed = 0;
  try {
    const auto header = parse_line(line);
    box.dimension = header.at("d").get<int>();
    box.radius = header.at("L").get<int>();
    box.horizon = header.at("T").get<double>();
    box.boundary = parse_boundary(header.value("boundary", std::string("free")));
    rate = header.value("rate", 1.0);
    seed = header.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::parse, std::string("bad header: ") + ex.what());
  }
  box.validate();
  std::vector<SpaceTimePoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = parse_line(line);
      const auto coords = obj.at("x").get<std::vector<int>>();
      if (static_cast<int>(coords.size()) != box.dimension) {
        fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": site has wrong dimension");
      }
      points.push_back({obj.at("t").get<double>(), Site::from(coords)});
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  EventSet set(box, points);
  set.set_provenance(rate, seed);
  return set;
}

}  // namespace rsos
