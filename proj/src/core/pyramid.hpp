#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/lattice.hpp"
#include "core/surface.hpp"

namespace rsos {

enum class PyramidKind { pyramid, dual };

/// foundation_consistent: layer k of a height-h pyramid is the ball of radius
/// h - k and timing is checked against previous-layer events adjacent to the
/// event itself. wide_center: radius h - k + 1 and adjacency to the center.
enum class RadiusLaw { foundation_consistent, wide_center };

const char* to_string(RadiusLaw law) noexcept;
RadiusLaw parse_radius_law(const std::string& text);

/// Layers are listed in forward time order for both kinds: a pyramid shrinks
/// from layer 1 to layer h, a dual pyramid grows from a single event.
struct Pyramid {
  PyramidKind kind = PyramidKind::pyramid;
  RadiusLaw law = RadiusLaw::foundation_consistent;
  Site center;
  int height = 0;
  double within = 0.0;
  std::vector<std::vector<SpaceTimePoint>> layers;

  std::size_t event_count() const;
};

int layer_radius(PyramidKind kind, RadiusLaw law, int height, int layer);

/// Structural check on the box graph. On failure the reason is stored in
/// `why` when given.
bool validate_pyramid(const LatticeBox& box, const Pyramid& p, std::string* why = nullptr);
/// validate_pyramid plus membership of every event in `set`.
bool validate_against(const EventSet& set, const Pyramid& p, std::string* why = nullptr);

/// Time reversal t -> within - t; a pyramid becomes a dual pyramid and back.
Pyramid reverse_pyramid(const Pyramid& p);

/// Replace every layer by the earliest admissible events. Throws
/// ErrorCode::invalid_argument when `p` does not validate against `set`.
Pyramid pushdown(const EventSet& set, const Pyramid& p);

/// The accepted updates of a zero-initialized RSOS run that form the pyramid
/// of height RSOS(t, x) centered at x (events before t).
Pyramid extract_pyramid(const AcceptedLog& log, const Site& x, double t);
/// The accepted updates of a dual (well-initialized) RSOS run that form the
/// dual pyramid centered at the origin whose height is the minimum dual height.
Pyramid extract_dual_pyramid(const AcceptedLog& log, double t);

inline constexpr std::size_t kPyramidBruteForceCap = 12;

/// Calls `visit` for every pyramid (or dual pyramid) of height h centered at
/// x within time t that uses one event per layer site; stops early when
/// `visit` returns false. Returns the number visited.
std::size_t enumerate_pyramids(const EventSet& set, PyramidKind kind, RadiusLaw law, const Site& x, double t,
                               int h, const std::function<bool(const Pyramid&)>& visit);

enum class PyramidMethod { via_rsos, brute_force };

/// via_rsos: the RSOS height from zero at (t, x). brute_force: exhaustive
/// layer assignment search, refused above kPyramidBruteForceCap events.
int max_pyramid_height(const EventSet& set, const Site& x, double t, PyramidMethod method,
                       RadiusLaw law = RadiusLaw::foundation_consistent);

/// via_rsos: minimum over the box of the dual height at t (origin only).
/// brute_force: exhaustive search as above.
int max_dual_pyramid_height(const EventSet& set, const Site& x, double t, PyramidMethod method,
                            RadiusLaw law = RadiusLaw::foundation_consistent);

void write_json(std::ostream& out, const Pyramid& p);

}  // namespace rsos
