#pragma once

// Reference implementations used only by the tests. They work on plain
// (time, coordinates) lists over a free-boundary box and share no code with
// the library.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "core/lattice.hpp"

namespace oracle {

using Coords = std::vector<int>;

struct Point {
  double t;
  Coords x;
};

enum class Rule { rsos, krsos, bd };

struct Box {
  int d = 1;
  int L = 1;

  bool inside(const Coords& x) const {
    return std::all_of(x.begin(), x.end(), [&](int c) { return c >= -L && c <= L; });
  }
  // In-box neighbors, stay move first.
  std::vector<Coords> moves(const Coords& x) const {
    std::vector<Coords> out{x};
    for (int a = 0; a < d; ++a) {
      for (int s : {1, -1}) {
        Coords y = x;
        y[static_cast<std::size_t>(a)] += s;
        if (inside(y)) out.push_back(y);
      }
    }
    return out;
  }
  std::vector<Coords> sites() const {
    std::vector<Coords> out;
    Coords x(static_cast<std::size_t>(d), -L);
    for (;;) {
      out.push_back(x);
      int a = 0;
      while (a < d && x[static_cast<std::size_t>(a)] == L) x[static_cast<std::size_t>(a++)] = -L;
      if (a == d) return out;
      ++x[static_cast<std::size_t>(a)];
    }
  }
};

inline std::vector<Point> points_of(const rsos::EventSet& set) {
  std::vector<Point> out;
  for (const auto& p : set.points()) {
    const auto c = p.site.coords();
    out.push_back({p.time, Coords(c.begin(), c.end())});
  }
  return out;
}

inline Coords coords(const rsos::Site& s) { return Coords(s.coords().begin(), s.coords().end()); }

using Init = std::function<std::int64_t(const Coords&)>;

/// Straightforward event loop over a map of heights.
inline std::map<Coords, std::int64_t> evolve(const Box& box, std::vector<Point> pts, const Init& init, Rule rule,
                                             int k, double until) {
  std::map<Coords, std::int64_t> h;
  for (const auto& x : box.sites()) h[x] = init(x);
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.t < b.t; });
  for (const auto& p : pts) {
    if (p.t > until) break;
    const auto nbrs = box.moves(p.x);
    std::int64_t v = h[p.x] + 1;
    for (std::size_t i = 1; i < nbrs.size(); ++i) {
      const std::int64_t hn = h[nbrs[i]];
      if (rule == Rule::rsos) v = std::min(v, hn + 1);
      if (rule == Rule::krsos) v = std::min(v, hn + k);
      if (rule == Rule::bd) v = std::max(v, hn + 1);
    }
    h[p.x] = v;
  }
  return h;
}

/// Latest event at x with time in (s, before); nullptr when none.
inline const Point* latest_before(const std::vector<Point>& pts, const Coords& x, double before, double s) {
  const Point* best = nullptr;
  for (const auto& p : pts) {
    if (p.x == x && p.t < before && p.t > s && (!best || p.t > best->t)) best = &p;
  }
  return best;
}

/// Optimal path value from (t, x) back to time 0 by exhaustive recursion:
/// every event met may keep or change the location; min for rsos/krsos,
/// max for bd.
inline std::int64_t path_value(const Box& box, const std::vector<Point>& pts, double t, const Coords& x,
                               const Init& init, Rule rule, int k) {
  std::function<std::int64_t(double, const Coords&, bool)> rec = [&](double before, const Coords& y,
                                                                      bool inclusive) -> std::int64_t {
    const double bound = inclusive ? std::nextafter(before, INFINITY) : before;
    const Point* e = latest_before(pts, y, bound, 0.0);
    if (!e) return init(y);
    std::int64_t best = rule == Rule::bd ? LLONG_MIN : LLONG_MAX;
    for (const auto& z : box.moves(y)) {
      const std::int64_t cost = (rule == Rule::krsos && z != y) ? k : 1;
      const std::int64_t v = cost + rec(e->t, z, false);
      best = rule == Rule::bd ? std::max(best, v) : std::min(best, v);
    }
    return best;
  };
  return rec(t, x, true);
}

/// Largest number of events strictly before t met by a path from (t, x)
/// back to time s. When (t, x) is itself an event the path may leave x there.
inline std::int64_t depth(const Box& box, const std::vector<Point>& pts, double t, const Coords& x, double s) {
  if (t <= s) return 0;
  std::function<std::int64_t(double, const Coords&)> rec = [&](double before, const Coords& y) -> std::int64_t {
    const Point* e = latest_before(pts, y, before, s);
    if (!e) return 0;
    std::int64_t best = 0;
    for (const auto& z : box.moves(y)) best = std::max(best, rec(e->t, z));
    return 1 + best;
  };
  const bool is_event = std::any_of(pts.begin(), pts.end(), [&](const Point& p) { return p.t == t && p.x == x; });
  if (!is_event) return rec(t, x);
  std::int64_t best = 0;
  for (const auto& z : box.moves(x)) best = std::max(best, rec(t, z));
  return best;
}

/// Minimum over the box of the well-initialized RSOS surface at time t.
inline std::int64_t dual_minimum(const Box& box, const std::vector<Point>& pts, double t) {
  auto well = [](const Coords& x) {
    std::int64_t s = 0;
    for (int c : x) s += std::abs(c);
    return s;
  };
  const auto h = evolve(box, pts, well, Rule::rsos, 1, t);
  std::int64_t m = LLONG_MAX;
  for (const auto& [x, v] : h) m = std::min(m, v);
  return m;
}

/// Random heights in [0, 3] smoothed down until neighbor differences are at
/// most k.
template <typename Rng>
std::map<Coords, std::int64_t> random_admissible(const Box& box, int k, Rng& rng) {
  std::map<Coords, std::int64_t> h;
  for (;;) {
    h.clear();
    for (const auto& x : box.sites()) h[x] = static_cast<std::int64_t>(rng() % 4);
    bool ok = true;
    for (int pass = 0; pass < 64; ++pass) {
      ok = true;
      for (auto& [x, v] : h) {
        for (const auto& y : box.moves(x)) {
          if (v > h[y] + k) {
            v = h[y] + k;
            ok = false;
          }
        }
      }
      if (ok) break;
    }
    if (ok) return h;
  }
}

}  // namespace oracle
