#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/lattice.hpp"

namespace rsos {

enum class ModelKind { rsos, krsos, bd };

struct Model {
  ModelKind kind = ModelKind::rsos;
  int k = 1;  // only meaningful for krsos

  static Model rsos() { return {}; }
  static Model krsos(int k);
  static Model bd() { return {ModelKind::bd, 1}; }

  /// Largest admissible neighbor difference, or -1 when unconstrained (bd).
  int lipschitz() const noexcept;
  std::string name() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Accepts "rsos", "bd", "krsos" (k = 1) and "krsos:K".
Model parse_model(const std::string& text);

enum class InitKind { zero, well, explicit_values };

struct InitialCondition {
  InitKind kind = InitKind::zero;
  /// Heights by site; sites not listed are 0.
  std::map<Site, Height> values;

  static InitialCondition zero() { return {}; }
  static InitialCondition well() { return {InitKind::well, {}}; }
  static InitialCondition explicit_heights(std::map<Site, Height> values);

  Height at(const Site& site) const;
  std::vector<Height> materialize(const BoxGeometry& geometry) const;
  std::string name() const;
};

InitialCondition parse_init(const std::string& text);

/// Throws ErrorCode::inadmissible naming the first offending neighbor pair.
void check_admissible(const BoxGeometry& geometry, std::span<const Height> heights, const Model& model);

/// Mutable height field plus the model's local update rule.
class Surface {
 public:
  Surface(std::shared_ptr<const BoxGeometry> geometry, Model model, std::vector<Height> heights);

  /// Apply one clock ring at `site`; returns true iff the height changed.
  bool apply(std::size_t site) noexcept {
    const Height next = proposal(site);
    if (next == heights_[site]) return false;
    heights_[site] = next;
    return true;
  }

  /// Height the rule would produce at `site` without applying it.
  Height proposal(std::size_t site) const noexcept;

  Height height(std::size_t site) const noexcept { return heights_[site]; }
  std::span<const Height> heights() const noexcept { return heights_; }
  /// Overwrite a height (used for restarts); no admissibility check.
  void set_height(std::size_t site, Height h) noexcept { heights_[site] = h; }
  const BoxGeometry& geometry() const noexcept { return *geometry_; }
  const Model& model() const noexcept { return model_; }

 private:
  std::shared_ptr<const BoxGeometry> geometry_;
  Model model_;
  std::vector<Height> heights_;
};

struct HeightField {
  LatticeBox box;
  double clock = 0.0;
  std::vector<Height> heights;

  Height at(const Site& site) const { return heights[box.index_of(site)]; }
};

/// d=1: "site,height" rows. d=2: header row of x-coordinates then one row per
/// second coordinate. Other dimensions: "x1,...,xd,height" rows.
void write_csv(std::ostream& out, const HeightField& field);

struct AcceptedUpdate {
  double time = 0.0;
  std::uint32_t site = 0;
  Height new_height = 0;
};

class AcceptedLog {
 public:
  AcceptedLog() = default;
  explicit AcceptedLog(std::shared_ptr<const BoxGeometry> geometry);

  void push(const AcceptedUpdate& u) { entries_.push_back(u); }
  /// Build the per-site index; called once the log is complete.
  void finalize();

  std::span<const AcceptedUpdate> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const BoxGeometry& geometry() const noexcept { return *geometry_; }
  /// Indices into entries() of the updates at `site`, in time order.
  std::span<const std::uint32_t> at_site(std::size_t site) const noexcept {
    return {by_site_.data() + site_offsets_[site], site_offsets_[site + 1] - site_offsets_[site]};
  }
  std::optional<std::size_t> find(double time, std::size_t site) const;
  /// The update at `site` whose new height is h.
  std::optional<std::size_t> find_height(std::size_t site, Height h) const;
  SpaceTimePoint point(std::size_t index) const {
    return {entries_[index].time, geometry_->site(entries_[index].site)};
  }

 private:
  std::shared_ptr<const BoxGeometry> geometry_;
  std::vector<AcceptedUpdate> entries_;
  std::vector<std::size_t> site_offsets_;
  std::vector<std::uint32_t> by_site_;
};

/// JSON Lines {"t","x","h"}.
void write_jsonl(std::ostream& out, const AcceptedLog& log);

struct EvolveOptions {
  std::vector<double> snapshot_times;
  bool record_log = true;
};

struct Evolution {
  HeightField field;
  AcceptedLog log;
  std::vector<HeightField> snapshots;
};

/// Processes every event with time <= until in time order.
Evolution evolve(const EventSet& set, const InitialCondition& init, const Model& model, double until,
                 const EvolveOptions& options = {});

/// Same as evolve() but starting from explicit heights (used for restarts and
/// by the path DP's boundary values).
Evolution evolve_from(const EventSet& set, std::vector<Height> heights, const Model& model,
                      double after, double until, const EvolveOptions& options = {});

/// F_u: accepted updates at sites in u.site + N_0 with new height one below u.
std::vector<std::size_t> foundation(const AcceptedLog& log, std::size_t u);

}  // namespace rsos
