#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/lattice.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"
#include "support/oracles.hpp"

using namespace rsos;

namespace {

LatticeBox box1(int L, double T) {
  LatticeBox b;
  b.dimension = 1;
  b.radius = L;
  b.horizon = T;
  return b;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("box validation") {
  LatticeBox b = box1(0, 1.0);
  CHECK_THROWS_AS(b.validate(), Error);
  b = box1(2, 0.0);
  CHECK_THROWS_AS(b.validate(), Error);
  b = box1(2, 1.0);
  b.dimension = 5;
  CHECK_THROWS_AS(b.validate(), Error);
  CHECK_THROWS_AS(generate(box1(2, 1.0), 0.0, 1), Error);
  CHECK_THROWS_AS(generate(box1(2, 1.0), -1.0, 1), Error);
  GenerateOptions tight;
  tight.max_expected_events = 10.0;
  try {
    generate(box1(100, 1.0), 1.0, 1, tight);
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resource_limit);
  }
}

TEST_CASE("site indexing round trip") {
  LatticeBox b;
  b.dimension = 3;
  b.radius = 2;
  b.horizon = 1.0;
  for (std::size_t i = 0; i < b.site_count(); ++i) CHECK(b.index_of(b.site_at(i)) == i);
  CHECK(b.site_count() == 125);
  CHECK_THROWS_AS(b.index_of(Site{3, 0, 0}), Error);
}

TEST_CASE("generate is deterministic and seed dependent") {
  const auto b = box1(2, 1.0);
  const EventSet a = generate(b, 1.0, 42);
  const EventSet c = generate(b, 1.0, 42);
  CHECK(a == c);
  std::ostringstream sa, sc;
  write_jsonl(sa, a);
  write_jsonl(sc, c);
  CHECK(sa.str() == sc.str());
  bool differs = false;
  for (std::uint64_t s = 1; s < 10 && !differs; ++s) differs = !(generate(b, 1.0, s) == a);
  CHECK(differs);
}

TEST_CASE("events are strictly inside the window, distinct and per-site sorted") {
  LatticeBox b;
  b.dimension = 2;
  b.radius = 3;
  b.horizon = 5.0;
  const EventSet set = generate(b, 1.3, 9);
  double prev = 0.0;
  for (const auto& e : set.events()) {
    CHECK(e.time > prev);
    CHECK(e.time < b.horizon);
    prev = e.time;
  }
  std::size_t total = 0;
  for (std::size_t s = 0; s < set.geometry().site_count(); ++s) {
    const auto ts = set.times_at(s);
    total += ts.size();
    for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
    CHECK(set.count_at(s, b.horizon) == ts.size());
  }
  CHECK(total == set.size());
}

TEST_CASE("growing the box or horizon only adds events") {
  const EventSet small = generate(box1(3, 4.0), 1.0, 5);
  const EventSet wide = generate(box1(6, 4.0), 1.0, 5);
  const EventSet longer = generate(box1(3, 7.5), 1.0, 5);
  for (const auto& p : small.points()) {
    CHECK(wide.contains(p));
  }
  std::size_t early = 0;
  for (const auto& p : longer.points()) {
    if (p.time < 4.0) {
      ++early;
      CHECK(small.contains(p));
    }
  }
  CHECK(early == small.size());
}

TEST_CASE("mean event count matches (2L+1) T rate") {
  const auto b = box1(2, 1.0);
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 10000; ++s) counts.push_back(static_cast<double>(generate(b, 1.0, s).size()));
  const double m = mean(counts);
  const double se = std::sqrt(5.0 / 10000.0);
  CHECK(std::abs(m - 5.0) <= 3.0 * se);
}

TEST_CASE("interarrival gaps at a fixed site are Exp(1)") {
  const auto b = box1(1, 20000.0);
  const EventSet set = generate(b, 1.0, 17);
  const auto ts = set.times_at(b.index_of(Site{0}));
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : ts) {
    gaps.push_back(t - prev);
    prev = t;
  }
  gaps.resize(10000);
  const auto ks = ks_one_sample_exponential(gaps, 1.0, 0.01);
  CHECK(ks.p_asymptotic >= 0.01);
}

TEST_CASE("insert and remove") {
  const auto b = box1(2, 1.0);
  const EventSet empty(b);
  const SpaceTimePoint p{0.5, Site{1}};
  const EventSet one = insert_event(empty, p);
  REQUIRE(one.size() == 1);
  CHECK(one.points()[0] == p);
  CHECK(empty.size() == 0);

  const EventSet set = generate(b, 1.0, 3);
  const SpaceTimePoint q{0.123456789, Site{-1}};
  const EventSet more = insert_event(set, q);
  CHECK(more.size() == set.size() + 1);
  CHECK(more.contains(q));
  const auto site = b.index_of(q.site);
  CHECK(more.times_at(site).size() == set.times_at(site).size() + 1);
  for (std::size_t i = 1; i < more.times_at(site).size(); ++i) {
    CHECK(more.times_at(site)[i] > more.times_at(site)[i - 1]);
  }
  CHECK(remove_event(more, q) == set);

  if (!set.empty()) {
    const auto existing = set.points()[0];
    try {
      insert_event(set, {existing.time, Site{existing.site[0] == 0 ? 1 : 0}});
      FAIL("duplicate time accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::duplicate_time);
    }
  }
  try {
    insert_event(set, {0.3, Site{3}});
    FAIL("out of box accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_box);
  }
  CHECK_THROWS_AS(insert_event(set, {1.5, Site{0}}), Error);
  CHECK_THROWS_AS(remove_event(set, {0.77777, Site{0}}), Error);
}

TEST_CASE("reverse") {
  const auto b = box1(2, 1.0);
  const std::vector<SpaceTimePoint> pts{{0.2, Site{0}}, {0.9, Site{1}}};
  const EventSet set(b, pts);
  const EventSet r = reverse(set);
  REQUIRE(r.size() == 2);
  // Stored times sit on the box's time grid, within one quantum of the input.
  CHECK(r.points()[0].site == Site{1});
  CHECK(r.points()[0].time == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.points()[1].site == Site{0});
  CHECK(r.points()[1].time == doctest::Approx(0.8).epsilon(1e-15));
  const std::vector<SpaceTimePoint> dyadic{{0.25, Site{0}}, {0.875, Site{1}}};
  const EventSet rd = reverse(EventSet(b, dyadic));
  CHECK(rd.contains({0.75, Site{0}}));
  CHECK(rd.contains({0.125, Site{1}}));
  CHECK(reverse(EventSet(b)).empty());
  for (std::uint64_t s = 0; s < 200; ++s) {
    LatticeBox bb;
    bb.dimension = 1 + static_cast<int>(s % 2);
    bb.radius = 3;
    bb.horizon = 2.7 + static_cast<double>(s);
    const EventSet g = generate(bb, 1.0, s);
    CHECK(reverse(reverse(g)) == g);
    const EventSet rg = reverse(g);
    for (const auto& p : g.points()) CHECK(rg.contains({bb.horizon - p.time, p.site}));
  }
}

TEST_CASE("jsonl round trip is bit exact") {
  LatticeBox b;
  b.dimension = 2;
  b.radius = 2;
  b.horizon = 3.3;
  b.boundary = Boundary::periodic;
  const EventSet set = generate(b, 0.7, 1234);
  std::stringstream ss;
  write_jsonl(ss, set);
  const EventSet back = read_jsonl(ss);
  CHECK(back == set);
  CHECK(back.box() == set.box());
  CHECK(back.seed() == 1234);

  std::istringstream bad("{\"d\":1}\n");
  CHECK_THROWS_AS(read_jsonl(bad), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_jsonl(empty), Error);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, 2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("depth: trivial cases and hand-built example") {
  const auto b = box1(2, 1.0);
  CHECK(depth(EventSet(b), {0.5, Site{0}}, 0.0) == 0);
  const std::vector<SpaceTimePoint> pts{{0.375, Site{0}}, {0.625, Site{1}}, {0.875, Site{0}}};
  const EventSet set(b, pts);
  CHECK(depth(set, {0.25, Site{0}}, 0.375) == 0);
  const oracle::Box ob{1, 2};
  const auto opts = oracle::points_of(set);
  CHECK(depth(set, {0.875, Site{0}}, 0.0) == oracle::depth(ob, opts, 0.875, {0}, 0.0));
  CHECK(depth(set, {0.875, Site{0}}, 0.0) == 2);
  CHECK(depth(set, {0.9, Site{0}}, 0.0) == 3);
}

TEST_CASE("depth matches exhaustive search and is monotone") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    LatticeBox b;
    b.dimension = 1 + static_cast<int>(seed % 2);
    b.radius = b.dimension == 1 ? 2 : 1;
    b.horizon = 1.5;
    const EventSet set = generate(b, 1.0, seed);
    if (set.size() > 12) continue;
    const oracle::Box ob{b.dimension, b.radius};
    const auto opts = oracle::points_of(set);
    for (const auto& p : set.points()) {
      for (double s : {0.0, 0.5}) {
        CHECK(depth(set, p, s) == oracle::depth(ob, opts, p.time, oracle::coords(p.site), s));
        ++compared;
      }
    }
    for (const auto& u : set.points()) {
      for (const auto& v : set.points()) {
        if (v.time < u.time && b.distance(u.site, v.site) == 1) CHECK(depth(set, v, 0.0) < depth(set, u, 0.0));
      }
    }
  }
  CHECK(compared > 500);
}

}  // TEST_SUITE
