#include <doctest.h>

#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/surface.hpp"
#include "support/oracles.hpp"

using namespace rsos;

namespace {

LatticeBox make_box(int d, int L, double T) {
  LatticeBox b;
  b.dimension = d;
  b.radius = L;
  b.horizon = T;
  return b;
}

InitialCondition to_init(const std::map<oracle::Coords, std::int64_t>& h) {
  std::map<Site, Height> values;
  for (const auto& [x, v] : h) values[Site::from(x)] = v;
  return InitialCondition::explicit_heights(values);
}

}  // namespace

TEST_SUITE("surface") {

TEST_CASE("parsers") {
  CHECK(parse_model("rsos") == Model::rsos());
  CHECK(parse_model("bd") == Model::bd());
  CHECK(parse_model("krsos:3") == Model::krsos(3));
  CHECK(parse_model("krsos") == Model::krsos(1));
  CHECK_THROWS_AS(parse_model("eden"), Error);
  CHECK_THROWS_AS(parse_model("krsos:0"), Error);
  CHECK(parse_init("zero").kind == InitKind::zero);
  CHECK(parse_init("well").at(Site{-3, 2}) == 5);
  const auto e = parse_init("explicit:0,1=2;1,1=3");
  CHECK(e.at(Site{0, 1}) == 2);
  CHECK(e.at(Site{1, 1}) == 3);
  CHECK(e.at(Site{5, 5}) == 0);
  CHECK_THROWS_AS(parse_init("explicit:0"), Error);
  CHECK_THROWS_AS(parse_init("hill"), Error);
}

TEST_CASE("hand examples") {
  const auto b = make_box(1, 2, 1.0);
  const EventSet empty(b);
  const auto evo0 = evolve(empty, InitialCondition::well(), Model::rsos(), 1.0);
  CHECK(evo0.log.size() == 0);
  for (int x = -2; x <= 2; ++x) CHECK(evo0.field.at(Site{x}) == std::abs(x));

  const std::vector<SpaceTimePoint> one{{0.5, Site{0}}};
  const auto evo1 = evolve(EventSet(b, one), InitialCondition::zero(), Model::rsos(), 1.0);
  CHECK(evo1.field.at(Site{0}) == 1);
  CHECK(evo1.field.at(Site{1}) == 0);
  CHECK(evo1.log.size() == 1);

  const std::vector<SpaceTimePoint> at1{{0.5, Site{1}}};
  const auto init = InitialCondition::explicit_heights({{Site{0}, 0}, {Site{1}, 1}, {Site{2}, 1}});
  const auto evo2 = evolve(EventSet(b, at1), init, Model::rsos(), 1.0);
  CHECK(evo2.field.at(Site{1}) == 1);
  CHECK(evo2.log.size() == 0);
}

TEST_CASE("inadmissible initial conditions are rejected with the pair named") {
  const auto b = make_box(1, 2, 1.0);
  const auto bad = InitialCondition::explicit_heights({{Site{0}, 2}});
  try {
    evolve(EventSet(b), bad, Model::rsos(), 1.0);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::inadmissible);
    CHECK(std::string(e.what()).find("(0)") != std::string::npos);
  }
  CHECK_NOTHROW(evolve(EventSet(b), bad, Model::krsos(2), 1.0));
  CHECK_NOTHROW(evolve(EventSet(b), bad, Model::bd(), 1.0));
  CHECK_THROWS_AS(evolve(EventSet(b), InitialCondition::zero(), Model::rsos(), 2.0), Error);
  CHECK_THROWS_AS(evolve(EventSet(b), InitialCondition::explicit_heights({{Site{3}, 0}}), Model::rsos(), 1.0),
                  Error);
}

TEST_CASE("evolve matches a reference event loop for every model") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto b = make_box(d, d == 1 ? 4 : 2, 4.0);
    const EventSet set = generate(b, 1.0, seed);
    const oracle::Box ob{d, b.radius};
    const auto pts = oracle::points_of(set);
    for (int k : {1, 2, 3}) {
      const auto h0 = oracle::random_admissible(ob, k, rng);
      const auto init = to_init(h0);
      const oracle::Init oinit = [&](const oracle::Coords& x) { return h0.at(x); };
      const Model m = k == 1 ? Model::rsos() : Model::krsos(k);
      const auto ref = oracle::evolve(ob, pts, oinit, k == 1 ? oracle::Rule::rsos : oracle::Rule::krsos, k, 3.0);
      const auto evo = evolve(set, init, m, 3.0);
      for (const auto& [x, v] : ref) CHECK(evo.field.at(Site::from(x)) == v);
    }
    const auto refbd = oracle::evolve(ob, pts, [](const oracle::Coords&) { return 0; }, oracle::Rule::bd, 1, 4.0);
    const auto bd = evolve(set, InitialCondition::zero(), Model::bd(), 4.0);
    for (const auto& [x, v] : refbd) CHECK(bd.field.at(Site::from(x)) == v);
  }
}

TEST_CASE("krsos with k = 1 is rsos") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EventSet set = generate(make_box(2, 3, 5.0), 1.0, seed);
    const auto a = evolve(set, InitialCondition::well(), Model::rsos(), 5.0);
    const auto b = evolve(set, InitialCondition::well(), Model::krsos(1), 5.0);
    CHECK(a.field.heights == b.field.heights);
  }
}

TEST_CASE("Lipschitz preservation, monotone growth and Poisson dominance at every event") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto b = make_box(d, 4, 6.0);
    const EventSet set = generate(b, 1.0, seed);
    for (int k : {1, 2}) {
      const Model m = k == 1 ? Model::rsos() : Model::krsos(k);
      const auto init = InitialCondition::well();
      Surface s(set.shared_geometry(), m, init.materialize(set.geometry()));
      const auto h0 = init.materialize(set.geometry());
      std::vector<std::int64_t> rings(set.geometry().site_count(), 0);
      bool ok = true;
      for (const auto& e : set.events()) {
        s.apply(e.site);
        ++rings[e.site];
        for (std::size_t x = 0; x < rings.size(); ++x) {
          ok = ok && s.height(x) >= h0[x] && s.height(x) - h0[x] <= rings[x];
          for (auto n : set.geometry().neighbors(x)) {
            if (n >= 0) ok = ok && std::abs(s.height(x) - s.height(static_cast<std::size_t>(n))) <= k;
          }
        }
      }
      CHECK(ok);
    }
  }
}

TEST_CASE("single-update monotone coupling") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto b = make_box(1, 5, 6.0);
    const EventSet set = generate(b, 1.0, seed);
    const auto h = InitialCondition::zero().materialize(set.geometry());
    // H' = H + 1 on a random interval keeps admissibility.
    auto h2 = h;
    const auto lo = rng() % h.size();
    const auto hi = lo + rng() % (h.size() - lo);
    for (auto i = lo; i <= hi; ++i) h2[i] += 1;
    Surface a(set.shared_geometry(), Model::rsos(), h);
    Surface c(set.shared_geometry(), Model::rsos(), h2);
    bool ok = true;
    for (const auto& e : set.events()) {
      a.apply(e.site);
      c.apply(e.site);
      for (std::size_t x = 0; x < h.size(); ++x) ok = ok && a.height(x) <= c.height(x) && c.height(x) <= a.height(x) + 1;
    }
    CHECK(ok);
  }
}

TEST_CASE("accepted log: consecutive heights per site and foundation lemma") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const EventSet set = generate(make_box(d, 3, 5.0), 1.0, seed);
    const auto init = InitialCondition::well();
    const auto evo = evolve(set, init, Model::rsos(), 5.0);
    const auto& log = evo.log;
    const auto& geom = set.geometry();
    for (std::size_t s = 0; s < geom.site_count(); ++s) {
      Height expect = init.at(geom.site(s)) + 1;
      for (auto i : log.at_site(s)) CHECK(log.entries()[i].new_height == expect++);
    }
    for (std::size_t u = 0; u < log.size(); ++u) {
      const auto& e = log.entries()[u];
      const auto f = foundation(log, u);
      double latest = 0.0;
      for (auto v : f) {
        const auto& ev = log.entries()[v];
        CHECK(ev.new_height == e.new_height - 1);
        CHECK(set.box().distance(geom.site(ev.site), geom.site(e.site)) <= 1);
        latest = std::max(latest, ev.time);
      }
      CHECK(e.time > latest);
      // u is the first clock ring at its site after the foundation completes.
      const auto ts = set.times_at(e.site);
      const auto first = std::upper_bound(ts.begin(), ts.end(), latest);
      REQUIRE(first != ts.end());
      CHECK(*first == e.time);
    }
  }
}

TEST_CASE("foundation of zero-init updates") {
  const auto b = make_box(1, 3, 10.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const EventSet set = generate(b, 1.0, seed);
    const auto evo = evolve(set, InitialCondition::zero(), Model::rsos(), 10.0);
    for (std::size_t u = 0; u < evo.log.size(); ++u) {
      const auto& e = evo.log.entries()[u];
      const auto f = foundation(evo.log, u);
      if (e.new_height == 1) {
        CHECK(f.empty());
      } else if (set.geometry().site(e.site) == Site{0} && e.new_height == 2) {
        for (auto v : f) CHECK(evo.log.entries()[v].new_height == 1);
        std::size_t expected = 0;
        for (int x : {-1, 0, 1}) expected += evo.log.find_height(b.index_of(Site{x}), 1).has_value();
        CHECK(f.size() == expected);
      }
    }
    CHECK_THROWS_AS(foundation(evo.log, evo.log.size()), Error);
  }
}

TEST_CASE("snapshots and evolve_from") {
  const auto b = make_box(1, 4, 6.0);
  const EventSet set = generate(b, 1.0, 77);
  EvolveOptions o;
  o.snapshot_times = {1.0, 3.0};
  const auto evo = evolve(set, InitialCondition::zero(), Model::rsos(), 6.0, o);
  REQUIRE(evo.snapshots.size() == 2);
  CHECK(evo.snapshots[1].heights == evolve(set, InitialCondition::zero(), Model::rsos(), 3.0).field.heights);
  const auto rest = evolve_from(set, evo.snapshots[1].heights, Model::rsos(), 3.0, 6.0);
  CHECK(rest.field.heights == evo.field.heights);
  o.snapshot_times = {7.0};
  CHECK_THROWS_AS(evolve(set, InitialCondition::zero(), Model::rsos(), 6.0, o), Error);
}

TEST_CASE("csv and jsonl output") {
  const auto b = make_box(2, 1, 1.0);
  const std::vector<SpaceTimePoint> pts{{0.5, Site{0, 0}}};
  const auto evo = evolve(EventSet(b, pts), InitialCondition::zero(), Model::rsos(), 1.0);
  std::ostringstream csv, js;
  write_csv(csv, evo.field);
  write_jsonl(js, evo.log);
  CHECK(csv.str().find('1') != std::string::npos);
  CHECK(js.str() == "{\"t\":0.5,\"x\":[0,0],\"h\":1}\n");
}

}  // TEST_SUITE
