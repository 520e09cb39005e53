#pragma once

// The random Poisson lattice: clock rings over a finite box [-L, L]^d and the
// time window (0, T], indexed both globally in time order and per site.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rsos {

inline constexpr int kMaxDimension = 4;

using Height = std::int64_t;

class Site {
 public:
  Site() = default;
  /// The origin of Z^dimension.
  explicit Site(int dimension);
  Site(std::initializer_list<int> coords);
  static Site from(std::span<const int> coords);

  int dimension() const noexcept { return dimension_; }
  int operator[](int axis) const { return coords_[static_cast<std::size_t>(axis)]; }
  int& operator[](int axis) { return coords_[static_cast<std::size_t>(axis)]; }
  std::span<const int> coords() const noexcept {
    return {coords_.data(), static_cast<std::size_t>(dimension_)};
  }

  int l1_norm() const noexcept;
  int linf_norm() const noexcept;
  std::string to_string() const;

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;

 private:
  std::array<int, kMaxDimension> coords_{};
  int dimension_ = 0;
};

Site operator+(const Site& a, const Site& b);
Site operator-(const Site& a, const Site& b);

struct SpaceTimePoint {
  double time = 0.0;
  Site site;

  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

enum class Boundary { free, periodic };

const char* to_string(Boundary boundary) noexcept;
Boundary parse_boundary(const std::string& text);

/// Finite truncation [-radius, radius]^dimension of Z^d over the time window
/// (0, horizon].
struct LatticeBox {
  int dimension = 1;
  int radius = 1;
  double horizon = 1.0;
  Boundary boundary = Boundary::free;

  void validate() const;
  std::size_t site_count() const;
  int side() const noexcept { return 2 * radius + 1; }
  bool contains(const Site& site) const noexcept;
  std::size_t index_of(const Site& site) const;
  Site site_at(std::size_t index) const;
  /// Graph distance in the box (l1, or wrapped l1 under periodic boundary).
  int distance(const Site& a, const Site& b) const;
  /// Number of lateral steps from `site` to the nearest box edge site.
  int edge_distance(const Site& site) const;
  /// Times are stored as integer multiples of this quantum so that reversal
  /// t -> horizon - t is exact in binary floating point.
  double time_quantum() const;
  double snap_time(double t) const;

  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;
};

/// Precomputed neighbor table for a box. Shared (immutable) by every event set,
/// surface and path computation on that box.
class BoxGeometry {
 public:
  explicit BoxGeometry(const LatticeBox& box);

  const LatticeBox& box() const noexcept { return box_; }
  std::size_t site_count() const noexcept { return sites_.size(); }
  int dimension() const noexcept { return box_.dimension; }
  /// 2d neighbor slots in the order +e1, -e1, +e2, -e2, ...; -1 marks a
  /// missing neighbor (free boundary).
  std::span<const std::int32_t> neighbors(std::size_t site) const noexcept {
    const auto width = static_cast<std::size_t>(2 * box_.dimension);
    return {neighbors_.data() + site * width, width};
  }
  const Site& site(std::size_t index) const noexcept { return sites_[index]; }
  std::size_t index_of(const Site& site) const { return box_.index_of(site); }
  int origin_index() const noexcept { return origin_; }

 private:
  LatticeBox box_;
  std::vector<Site> sites_;
  std::vector<std::int32_t> neighbors_;
  int origin_ = 0;
};

std::shared_ptr<const BoxGeometry> make_geometry(const LatticeBox& box);

/// Offset of direction `dir` in N_0: 0 is the stay move, 2i+1 is +e_i and
/// 2i+2 is -e_i.
Site direction_offset(int dimension, int dir);

struct Event {
  double time = 0.0;
  std::uint32_t site = 0;
  /// Position of this event inside the per-site time list (flattened).
  std::uint32_t slot = 0;
};

struct GenerateOptions {
  /// Refuse boxes whose expected number of events exceeds this budget.
  double max_expected_events = 5.0e7;
};

/// Immutable set of clock rings. Copies share the box geometry.
class EventSet {
 public:
  explicit EventSet(const LatticeBox& box);
  /// Times are snapped to the box's time quantum (as in insert_event).
  EventSet(const LatticeBox& box, std::span<const SpaceTimePoint> points);

  const LatticeBox& box() const noexcept { return geometry_->box(); }
  const BoxGeometry& geometry() const noexcept { return *geometry_; }
  std::shared_ptr<const BoxGeometry> shared_geometry() const noexcept { return geometry_; }

  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  std::span<const Event> events() const noexcept { return events_; }
  std::span<const double> times_at(std::size_t site) const noexcept {
    return {site_times_.data() + site_offsets_[site], site_offsets_[site + 1] - site_offsets_[site]};
  }
  std::size_t site_offset(std::size_t site) const noexcept { return site_offsets_[site]; }

  SpaceTimePoint point(const Event& e) const { return {e.time, geometry_->site(e.site)}; }
  std::vector<SpaceTimePoint> points() const;
  bool contains(const SpaceTimePoint& p) const;

  /// Number of events at `site` with time <= until.
  std::size_t count_at(std::size_t site, double until) const;
  /// Number of events with after < time <= until over the whole box.
  std::size_t count_between(double after, double until) const;
  /// Index into events() of the first event with time > t.
  std::size_t upper_bound(double t) const;

  double rate() const noexcept { return rate_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_provenance(double rate, std::uint64_t seed) noexcept {
    rate_ = rate;
    seed_ = seed;
  }

  friend bool operator==(const EventSet& a, const EventSet& b);

 private:
  friend EventSet generate(const LatticeBox&, double, std::uint64_t, const GenerateOptions&);
  friend EventSet insert_event(const EventSet&, const SpaceTimePoint&);
  friend EventSet remove_event(const EventSet&, const SpaceTimePoint&);
  friend EventSet reverse(const EventSet&);
  void build_from_sorted(std::vector<Event> events);

  std::shared_ptr<const BoxGeometry> geometry_;
  std::vector<Event> events_;
  std::vector<std::size_t> site_offsets_;
  std::vector<double> site_times_;
  double rate_ = 1.0;
  std::uint64_t seed_ = 0;
};

/// Independent rate-`rate` Poisson clocks at every site of the box over (0, T).
///
/// Each site draws from its own stream keyed by (seed, coordinates), so the
/// events at a site do not depend on the box radius: growing the box only adds
/// events. Extending the horizon only adds events while T stays in the same
/// binade, since the time quantum follows T.
EventSet generate(const LatticeBox& box, double rate, std::uint64_t seed,
                  const GenerateOptions& options = {});

EventSet insert_event(const EventSet& set, const SpaceTimePoint& p);
EventSet remove_event(const EventSet& set, const SpaceTimePoint& p);
/// Time reversal t -> T - t at every site.
EventSet reverse(const EventSet& set);

/// Lattice depth D_s(p): the largest number of events met strictly before
/// p.time by a lattice path started at p and run back to time s.
std::int64_t depth(const EventSet& set, const SpaceTimePoint& p, double s);

/// JSON Lines: one header object then one {"t","x"} object per event.
void write_jsonl(std::ostream& out, const EventSet& set);
EventSet read_jsonl(std::istream& in);

/// Decimal text with 17 significant digits; parses back to the same double.
std::string format_double(double value);

}  // namespace rsos
