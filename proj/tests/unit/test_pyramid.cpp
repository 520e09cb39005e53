#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "core/error.hpp"
#include "core/pyramid.hpp"

using namespace rsos;

namespace {

LatticeBox make_box(int d, int L, double T) {
  LatticeBox b;
  b.dimension = d;
  b.radius = L;
  b.horizon = T;
  return b;
}

std::vector<std::vector<SpaceTimePoint>> by_site(std::vector<std::vector<SpaceTimePoint>> layers) {
  for (auto& l : layers) {
    std::sort(l.begin(), l.end(), [](const auto& a, const auto& b) { return a.site < b.site; });
  }
  return layers;
}

}  // namespace

TEST_SUITE("pyramid") {

TEST_CASE("radius laws") {
  CHECK(layer_radius(PyramidKind::pyramid, RadiusLaw::foundation_consistent, 3, 1) == 2);
  CHECK(layer_radius(PyramidKind::pyramid, RadiusLaw::foundation_consistent, 3, 3) == 0);
  CHECK(layer_radius(PyramidKind::pyramid, RadiusLaw::wide_center, 3, 1) == 3);
  CHECK(layer_radius(PyramidKind::dual, RadiusLaw::foundation_consistent, 3, 1) == 0);
  CHECK(layer_radius(PyramidKind::dual, RadiusLaw::foundation_consistent, 3, 3) == 2);
  CHECK(parse_radius_law(to_string(RadiusLaw::wide_center)) == RadiusLaw::wide_center);
  CHECK_THROWS_AS(parse_radius_law("round"), Error);
}

TEST_CASE("validation of hand-built pyramids") {
  const auto b = make_box(1, 3, 2.0);
  Pyramid empty;
  empty.center = Site{0};
  empty.within = 1.0;
  CHECK(validate_pyramid(b, empty));

  Pyramid p;
  p.center = Site{0};
  p.height = 2;
  p.within = 2.0;
  p.layers = {{{0.125, Site{-1}}, {0.25, Site{0}}, {0.375, Site{1}}}, {{0.5, Site{0}}}};
  std::string why;
  CHECK(validate_pyramid(b, p, &why));
  CHECK(p.event_count() == 4);

  Pyramid late = p;
  late.layers[1][0].time = 0.25;
  CHECK_FALSE(validate_pyramid(b, late, &why));
  CHECK_FALSE(why.empty());

  Pyramid wrong_shape = p;
  wrong_shape.layers[0].pop_back();
  CHECK_FALSE(validate_pyramid(b, wrong_shape));

  Pyramid outside = p;
  outside.within = 0.4;
  CHECK_FALSE(validate_pyramid(b, outside));

  const Pyramid r = reverse_pyramid(p);
  CHECK(r.kind == PyramidKind::dual);
  CHECK(validate_pyramid(b, r));
  CHECK(by_site(reverse_pyramid(r).layers) == by_site(p.layers));
}

TEST_CASE("extracted pyramids validate with the RSOS height") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto b = make_box(d, 3, 4.0);
    const EventSet set = generate(b, 1.0, seed);
    const auto evo = evolve(set, InitialCondition::zero(), Model::rsos(), 4.0);
    const Pyramid p = extract_pyramid(evo.log, Site(d), 4.0);
    std::string why;
    CHECK_MESSAGE(validate_against(set, p, &why), why);
    CHECK(p.height == evo.field.at(Site(d)));
    const Pyramid q = pushdown(set, p);
    CHECK(by_site(q.layers) == by_site(p.layers));

    const auto dual = evolve(set, InitialCondition::well(), Model::rsos(), 4.0);
    const Pyramid dp = extract_dual_pyramid(dual.log, 4.0);
    CHECK_MESSAGE(validate_against(set, dp, &why), why);
    Height m = 1 << 20;
    for (auto h : dual.field.heights) m = std::min(m, h);
    CHECK(dp.height == m);
  }
}

TEST_CASE("brute force, via_rsos, reversal and pushdown") {
  int searched = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto b = make_box(1, 2, 2.0);
    const EventSet set = generate(b, 1.0, seed);
    if (set.size() > kPyramidBruteForceCap) continue;
    ++searched;
    const int via = max_pyramid_height(set, Site{0}, 2.0, PyramidMethod::via_rsos);
    CHECK(max_pyramid_height(set, Site{0}, 2.0, PyramidMethod::brute_force) == via);
    const EventSet rev = reverse(set);
    CHECK(max_dual_pyramid_height(rev, Site{0}, 2.0, PyramidMethod::brute_force) == via);
    CHECK(max_dual_pyramid_height(rev, Site{0}, 2.0, PyramidMethod::via_rsos) == via);
    const auto log = evolve(set, InitialCondition::zero(), Model::rsos(), 2.0).log;
    for (int h = 1; h <= via; ++h) {
      enumerate_pyramids(set, PyramidKind::pyramid, RadiusLaw::foundation_consistent, Site{0}, 2.0, h,
                         [&](const Pyramid& p) {
                           const Pyramid r = reverse_pyramid(p);
                           CHECK(validate_against(rev, r));
                           const Pyramid q = pushdown(set, p);
                           CHECK(q.height == p.height);
                           CHECK(validate_against(set, q));
                           for (std::size_t k = 0; k < q.layers.size(); ++k) {
                             for (const auto& v : q.layers[k]) {
                               const auto& orig = p.layers[k];
                               const auto same = std::find_if(orig.begin(), orig.end(),
                                                              [&](const auto& w) { return w.site == v.site; });
                               REQUIRE(same != orig.end());
                               CHECK(v.time <= same->time);
                               CHECK(log.find(v.time, b.index_of(v.site)).has_value());
                             }
                           }
                           return true;
                         });
    }
    CHECK(enumerate_pyramids(set, PyramidKind::pyramid, RadiusLaw::foundation_consistent, Site{0}, 2.0, via + 1,
                             [](const Pyramid&) { return true; }) == 0);
  }
  CHECK(searched > 300);
}

TEST_CASE("empty set and refusals") {
  const auto b = make_box(1, 2, 1.0);
  CHECK(max_pyramid_height(EventSet(b), Site{0}, 1.0, PyramidMethod::brute_force) == 0);
  CHECK(max_pyramid_height(EventSet(b), Site{0}, 1.0, PyramidMethod::via_rsos) == 0);
  const EventSet big = generate(make_box(1, 3, 10.0), 1.0, 2);
  REQUIRE(big.size() > kPyramidBruteForceCap);
  CHECK_THROWS_AS(max_pyramid_height(big, Site{0}, 10.0, PyramidMethod::brute_force), Error);
  Pyramid bogus;
  bogus.center = Site{0};
  bogus.height = 1;
  bogus.within = 1.0;
  bogus.layers = {{{0.5, Site{0}}}};
  CHECK_THROWS_AS(pushdown(EventSet(b), bogus), Error);
}

TEST_CASE("json output") {
  Pyramid p;
  p.center = Site{0};
  p.height = 1;
  p.within = 1.0;
  p.layers = {{{0.5, Site{0}}}};
  std::ostringstream os;
  write_json(os, p);
  CHECK(os.str().find("\"height\":1") != std::string::npos);
  CHECK(os.str().find("\"layers\"") != std::string::npos);
}

}  // TEST_SUITE
