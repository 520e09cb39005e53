#include "core/dual.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "core/error.hpp"

namespace rsos {

namespace {

/// Running minimum of a field whose entries only ever increase by one.
class MinTracker {
 public:
  explicit MinTracker(std::span<const Height> heights) {
    base_ = *std::min_element(heights.begin(), heights.end());
    min_ = base_;
    for (Height h : heights) bump(h, +1);
  }

  /// Records a change old -> old + 1; returns true if the minimum rose.
  bool raise(Height old) {
    bump(old, -1);
    bump(old + 1, +1);
    const Height before = min_;
    while (counts_[static_cast<std::size_t>(min_ - base_)] == 0) ++min_;
    return min_ > before;
  }

  Height minimum() const noexcept { return min_; }

 private:
  void bump(Height h, std::int64_t delta) {
    const auto i = static_cast<std::size_t>(h - base_);
    if (i >= counts_.size()) counts_.resize(std::max(i + 1, counts_.size() * 2), 0);
    counts_[i] += delta;
  }

  std::vector<std::int64_t> counts_;
  Height base_ = 0;
  Height min_ = 0;
};

}  // namespace

LatticeBox dual_box(int dimension, double until) {
  LatticeBox box;
  box.dimension = dimension;
  box.radius = std::max(1, static_cast<int>(std::ceil(until + 6.0 * std::sqrt(until))));
  box.horizon = until;
  return box;
}

Height DualTrajectory::minimum_at(double t) const {
  return static_cast<Height>(std::upper_bound(hitting.begin(), hitting.end(), t) - hitting.begin()) - 1;
}

std::int64_t DualTrajectory::count_at(double t) const {
  return std::upper_bound(arrivals.begin(), arrivals.end(), t,
                          [](double v, const DualArrival& a) { return v < a.time; }) -
         arrivals.begin();
}

std::int64_t DualTrajectory::width_at(double t) const {
  const auto n = count_at(t);
  return n == 0 ? 0 : arrivals[static_cast<std::size_t>(n - 1)].width;
}

DualTrajectory run_dual(const EventSet& set, double until) {
  const auto& box = set.box();
  if (until > box.horizon || until < 0.0) {
    fail(ErrorCode::invalid_argument, "dual run time must lie in [0, horizon]");
  }
  const auto& geom = set.geometry();
  Surface surface(set.shared_geometry(), Model::rsos(), InitialCondition::well().materialize(geom));
  MinTracker tracker(surface.heights());

  DualTrajectory traj;
  traj.box = box;
  traj.until = until;
  traj.hitting.push_back(0.0);
  std::vector<char> in_interface(geom.site_count(), 0);
  std::int64_t size = 0;
  int left = 0;
  int right = 0;
  const bool line = box.dimension == 1;

  const auto events = set.events();
  for (std::size_t i = 0; i < events.size() && events[i].time <= until; ++i) {
    const Event& e = events[i];
    const std::int64_t eligible = line ? (size == 0 ? 1 : size + 2) : 0;
    const Height old = surface.height(e.site);
    if (surface.apply(e.site)) {
      if (tracker.raise(old)) traj.hitting.push_back(e.time);
      if (!in_interface[e.site]) {
        in_interface[e.site] = 1;
        if (box.edge_distance(geom.site(e.site)) == 0) traj.exact = false;
        if (line) {
          const int x = geom.site(e.site)[0];
          if (size == 0) {
            left = right = x;
          } else if (x > right) {
            right = x;
            traj.right_jumps.push_back(e.time);
          } else if (x < left) {
            left = x;
            traj.left_jumps.push_back(e.time);
          }
        }
        ++size;
      }
    }
    if (in_interface[e.site]) {
      traj.arrivals.push_back({e.time, tracker.minimum(), left, right, size, eligible});
    }
  }
  traj.final_heights.assign(surface.heights().begin(), surface.heights().end());
  return traj;
}

std::optional<double> hitting_time(const DualTrajectory& traj, Height u) {
  if (u < 0 || static_cast<std::size_t>(u) >= traj.hitting.size()) return std::nullopt;
  return traj.hitting[static_cast<std::size_t>(u)];
}

void write_trajectory_csv(std::ostream& out, const DualTrajectory& traj) {
  out << "t_event,M,l,r,N\n";
  for (std::size_t j = 0; j < traj.arrivals.size(); ++j) {
    const auto& a = traj.arrivals[j];
    out << format_double(a.time) << "," << a.minimum << "," << a.left << "," << a.right << "," << j + 1 << "\n";
  }
}

void write_hitting_csv(std::ostream& out, const DualTrajectory& traj) {
  out << "u,T_u\n";
  for (std::size_t u = 0; u < traj.hitting.size(); ++u) out << u << "," << format_double(traj.hitting[u]) << "\n";
}

RestartRecord coupled_restart(const EventSet& set, Height u, Height v) {
  if (u < 1 || v < 1) fail(ErrorCode::invalid_argument, "coupled restart needs u, v >= 1");
  const auto& box = set.box();
  const auto& geom = set.geometry();
  Surface a(set.shared_geometry(), Model::rsos(), InitialCondition::well().materialize(geom));
  MinTracker a_min(a.heights());
  RestartRecord rec;

  const auto events = set.events();
  std::size_t i = 0;
  for (; i < events.size(); ++i) {
    const Event& e = events[i];
    const Height old = a.height(e.site);
    if (a.apply(e.site)) {
      if (box.edge_distance(geom.site(e.site)) == 0) rec.exact = false;
      a_min.raise(old);
      if (a_min.minimum() == u) {
        rec.t_u = e.time;
        rec.x0 = geom.site(e.site);
        ++i;
        break;
      }
    }
  }
  if (!rec.t_u) return rec;

  std::vector<Height> lifted(geom.site_count());
  for (std::size_t z = 0; z < lifted.size(); ++z) lifted[z] = u + box.distance(geom.site(z), rec.x0);
  Surface b(set.shared_geometry(), Model::rsos(), std::move(lifted));
  MinTracker b_min(b.heights());
  for (std::size_t z = 0; z < geom.site_count(); ++z) {
    if (b.height(z) < a.height(z)) rec.dominance_holds = false;
  }

  for (; i < events.size() && !(rec.t_star && rec.t_uv); ++i) {
    const Event& e = events[i];
    const Height old_a = a.height(e.site);
    const Height old_b = b.height(e.site);
    const bool edge = box.edge_distance(geom.site(e.site)) == 0;
    if (a.apply(e.site)) {
      if (edge) rec.exact = false;
      if (a_min.raise(old_a) && a_min.minimum() == u + v) rec.t_uv = e.time;
    }
    if (b.apply(e.site)) {
      if (edge) rec.exact = false;
      if (b_min.raise(old_b) && b_min.minimum() == u + v) rec.t_star = e.time - *rec.t_u;
    }
    if (b.height(e.site) < a.height(e.site)) rec.dominance_holds = false;
  }
  rec.inequality_holds = rec.t_star && rec.t_uv && *rec.t_uv >= *rec.t_u + *rec.t_star;
  return rec;
}

InterfaceStats interface_stats(const DualTrajectory& traj, const std::vector<double>& times) {
  if (traj.box.dimension != 1) {
    fail(ErrorCode::unsupported, "interface statistics are implemented for d = 1 only");
  }
  InterfaceStats st;
  if (!traj.arrivals.empty()) {
    auto gaps = [&](const std::vector<double>& jumps, std::vector<double>& out) {
      double prev = traj.arrivals.front().time;
      for (double t : jumps) {
        out.push_back(t - prev);
        prev = t;
      }
    };
    gaps(traj.right_jumps, st.right_interarrivals);
    gaps(traj.left_jumps, st.left_interarrivals);
  }
  for (double t : times) {
    st.widths.push_back(traj.width_at(t));
    st.counts.push_back(traj.count_at(t));
  }
  for (double t : traj.hitting) st.a_table.push_back(traj.count_at(t));
  return st;
}

namespace {

std::optional<std::vector<double>> conditional_rates(const DualTrajectory& traj, Height u,
                                                     RateConvention convention) {
  const auto t_u = hitting_time(traj, u);
  if (!t_u) return std::nullopt;
  if (traj.box.dimension != 1) {
    fail(ErrorCode::unsupported, "conditional hitting-time rates are implemented for d = 1 only");
  }
  const auto a_u = static_cast<std::size_t>(traj.count_at(*t_u));
  std::vector<double> rates(a_u);
  for (std::size_t j = 0; j < a_u; ++j) {
    if (convention == RateConvention::eligible_sites) {
      rates[j] = static_cast<double>(traj.arrivals[j].eligible);
    } else {
      rates[j] = j == 0 ? 1.0 : static_cast<double>(traj.arrivals[j - 1].width);
    }
  }
  return rates;
}

}  // namespace

std::optional<BerryEsseen> berry_esseen_stats(const DualTrajectory& traj, Height u, RateConvention convention) {
  const auto rates = conditional_rates(traj, u, convention);
  if (!rates) return std::nullopt;
  BerryEsseen be;
  be.a_u = static_cast<std::int64_t>(rates->size());
  double cube = 0.0;
  for (double r : *rates) {
    be.mu += 1.0 / r;
    be.sigma_sq += 1.0 / (r * r);
    cube += 1.0 / (r * r * r);
  }
  be.theta = (12.0 * std::exp(-1.0) - 2.0) * cube;
  return be;
}

std::optional<double> resample_hitting_time(const DualTrajectory& traj, Height u, RateConvention convention,
                                            Stream& stream) {
  const auto rates = conditional_rates(traj, u, convention);
  if (!rates) return std::nullopt;
  double t = 0.0;
  for (double r : *rates) t += stream.exponential(r);
  return t;
}

}  // namespace rsos
