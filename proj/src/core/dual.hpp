#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "core/lattice.hpp"
#include "core/rng.hpp"
#include "core/surface.hpp"

namespace rsos {

/// RSOS started from the well ||x||_1, observed at the events that touch the
/// interface (the sites that have had at least one accepted update).
///
/// An event is counted as interface-accepted when its site belongs to the
/// interface right after the event is applied, so the growth of an edge is
/// itself an interface-accepted event.
struct DualArrival {
  double time = 0.0;
  Height minimum = 0;      // M just after the event
  int left = 0;            // interface [left, right] in d = 1
  int right = 0;
  std::int64_t width = 0;  // interface size after the event (Y_j)
  std::int64_t eligible = 0;  // sites whose events were counted just before (exact rate)
};

struct DualTrajectory {
  LatticeBox box;
  double until = 0.0;
  std::vector<DualArrival> arrivals;
  /// hitting[u] = T(u) for u = 0..M(until).
  std::vector<double> hitting;
  std::vector<double> right_jumps;
  std::vector<double> left_jumps;
  /// Heights at `until`, for duality checks.
  std::vector<Height> final_heights;
  bool exact = true;

  Height minimum_at(double t) const;
  std::int64_t width_at(double t) const;
  std::int64_t count_at(double t) const;
  Height final_minimum() const { return static_cast<Height>(hitting.size()) - 1; }
};

/// Default box for a dual run to `until`: L = ceil(until + 6 sqrt(until)).
LatticeBox dual_box(int dimension, double until);

DualTrajectory run_dual(const EventSet& set, double until);

std::optional<double> hitting_time(const DualTrajectory& traj, Height u);

/// CSV with columns t_event,M,l,r,N (one row per interface-accepted event).
void write_trajectory_csv(std::ostream& out, const DualTrajectory& traj);
/// CSV with columns u,T_u.
void write_hitting_csv(std::ostream& out, const DualTrajectory& traj);

struct RestartRecord {
  std::optional<double> t_u;
  std::optional<double> t_star;
  std::optional<double> t_uv;
  Site x0;
  bool inequality_holds = false;
  /// B >= A at every site after every event past T(u).
  bool dominance_holds = true;
  bool exact = true;
};

/// Runs A (the dual process) to T(u), restarts a copy B from the well of base
/// u centered at the site accepted at T(u), then drives both with the same
/// later events until T(u+v) of A and the first time min B >= u + v.
RestartRecord coupled_restart(const EventSet& set, Height u, Height v);

struct InterfaceStats {
  std::vector<double> right_interarrivals;
  std::vector<double> left_interarrivals;
  std::vector<std::int64_t> widths;  // I_t at the requested times
  std::vector<std::int64_t> counts;  // N_t at the requested times
  /// a_table[u] = A(u) = N_{T(u)}.
  std::vector<std::int64_t> a_table;
};

/// d = 1 only (ErrorCode::unsupported otherwise). Interarrivals start at the
/// time the interface first forms.
InterfaceStats interface_stats(const DualTrajectory& traj, const std::vector<double>& times);

enum class RateConvention {
  /// j-th rate Y_{j-1} with Y_0 = 1.
  interface_width,
  /// j-th rate = number of sites whose events would be counted: 1, then Y_{j-1} + 2.
  eligible_sites,
};

struct BerryEsseen {
  double mu = 0.0;
  double sigma_sq = 0.0;
  double theta = 0.0;
  std::int64_t a_u = 0;
};

std::optional<BerryEsseen> berry_esseen_stats(const DualTrajectory& traj, Height u,
                                              RateConvention convention = RateConvention::eligible_sites);

/// T(u) redrawn as a sum of independent exponentials with the conditional
/// rates recorded in the trajectory.
std::optional<double> resample_hitting_time(const DualTrajectory& traj, Height u, RateConvention convention,
                                            Stream& stream);

}  // namespace rsos
