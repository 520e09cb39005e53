#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "core/lattice.hpp"
#include "core/surface.hpp"

namespace rsos {

struct PathStep {
  double time = 0.0;
  Site site;      // location of the event (the path's position at that time)
  int move = 0;   // direction index into N_0, see direction_offset()
};

/// A lattice path run backwards from `start` to `end_time`. Every event the
/// path sits on is listed, latest first.
struct PathTrace {
  SpaceTimePoint start;
  double end_time = 0.0;
  std::vector<PathStep> steps;

  std::int64_t weight() const noexcept { return static_cast<std::int64_t>(steps.size()); }
  /// Vertical events count 1, horizontal (moving) events count k.
  std::int64_t weight_k(int k) const noexcept;
  /// Position at time tau (right-continuous in forward time).
  Site position_at(double tau) const;
  Site end_site() const;
};

/// Throws ErrorCode::invalid_argument describing the first violated invariant.
void validate_path(const EventSet& set, const PathTrace& path);
bool on_path(const PathTrace& path, const SpaceTimePoint& p);

void write_json(std::ostream& out, const PathTrace& path);

struct PathValue {
  Height value = 0;
  /// False when finite-box truncation may have changed the value.
  bool exact = true;
};

/// Values at every box site at time t of the optimal path functional from
/// time s: min over paths (max for bd) of weight plus the boundary value at
/// the path's end. Boundary values are the initial heights at s = 0 and the
/// evolved surface at time s otherwise.
std::vector<Height> path_values(const EventSet& set, double t, const InitialCondition& init,
                                double s = 0.0, const Model& model = Model::rsos());

PathValue min_weight(const EventSet& set, double t, const Site& x, const InitialCondition& init,
                     double s = 0.0, const Model& model = Model::rsos());

/// Exactness certificate for a boxed optimal value at x (see README).
bool certify(const LatticeBox& box, const Site& x, Height value, Height boundary_min, const Model& model);

/// One optimal path. Ties are broken in the order stay, +e1, -e1, +e2, ...
PathTrace argmin_path(const EventSet& set, double t, const Site& x, const InitialCondition& init,
                      double s = 0.0, const Model& model = Model::rsos());

inline constexpr std::size_t kEnumerationCap = 14;

/// Calls `visit` once for every lattice path from (t, x) back to time s.
/// Refuses (ErrorCode::resource_limit) when more than `cap` events lie in
/// (s, t]. Returns the number of paths visited.
std::uint64_t enumerate_paths(const EventSet& set, double t, const Site& x, double s,
                              const std::function<void(const PathTrace&)>& visit,
                              std::size_t cap = kEnumerationCap);

/// min_weight after inserting p minus min_weight before (expected in {0, 1}).
Height perturb_height(const EventSet& set, const SpaceTimePoint& p, double t, const Site& x,
                      const InitialCondition& init);

}  // namespace rsos
