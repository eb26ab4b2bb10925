#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "common.hpp"

namespace refless {

struct Interval {
  double lo, hi;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

// E = [e0, e_inf] minus finitely many open gaps. With `unbounded` set the
// set is [e0, ∞) minus the gaps and e_inf only bounds the gap list.
struct FiniteGapSet {
  double e0 = 0.0, e_inf = 0.0;
  std::vector<Interval> gaps;
  bool unbounded = false;

  static FiniteGapSet from_bands(std::vector<Interval> bands, bool unbounded = false) {
    if (bands.empty()) throw InvalidInput("set needs at least one band");
    std::sort(bands.begin(), bands.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    FiniteGapSet s;
    s.e0 = bands.front().lo;
    s.e_inf = bands.back().hi;
    s.unbounded = unbounded;
    for (std::size_t i = 0; i < bands.size(); ++i) {
      if (bands[i].hi < bands[i].lo) throw InvalidInput("band with hi < lo");
      if (i && !(bands[i].lo > bands[i - 1].hi)) throw InvalidInput("bands overlap or touch");
      if (i) s.gaps.push_back({bands[i - 1].hi, bands[i].lo});
    }
    s.validate();
    return s;
  }

  void validate() const {
    if (!(e0 <= e_inf)) throw InvalidInput("e0 must not exceed e_inf");
    double prev = e0;
    for (const auto& g : gaps) {
      if (!(g.lo < g.hi)) throw InvalidInput("empty gap");
      if (!(g.lo >= prev) || !(g.hi <= e_inf)) throw InvalidInput("gaps must be ordered and inside [e0, e_inf]");
      prev = g.hi;
    }
  }

  std::vector<Interval> bands() const {
    std::vector<Interval> out;
    double lo = e0;
    for (const auto& g : gaps) {
      out.push_back({lo, g.lo});
      lo = g.hi;
    }
    out.push_back({lo, e_inf});
    return out;
  }

  // E_0 < E_1 < ... : band edges in increasing order.
  std::vector<double> endpoints() const {
    std::vector<double> out;
    for (const auto& b : bands()) {
      out.push_back(b.lo);
      out.push_back(b.hi);
    }
    return out;
  }

  std::size_t genus() const { return gaps.size(); }
  double diameter() const { return e_inf - e0; }
  double measure() const {
    double m = 0.0;
    for (const auto& b : bands()) m += b.length();
    return m;
  }

  bool contains(double x) const {
    if (x < e0) return false;
    if (x > e_inf) return unbounded;
    for (const auto& g : gaps)
      if (x > g.lo && x < g.hi) return false;
    return true;
  }

  double distance(double x) const {
    if (contains(x)) return 0.0;
    double d = inf;
    for (const auto& b : bands()) d = std::min({d, std::abs(x - b.lo), std::abs(x - b.hi)});
    if (unbounded && x > e_inf) d = 0.0;
    return d;
  }

  bool operator==(const FiniteGapSet&) const = default;
};

struct Arc {
  double lo, hi;  // counterclockwise from lo to hi, 0 < hi - lo <= 2π
  double length() const { return hi - lo; }
  bool contains(double t) const { return wrap_angle(t - lo) <= hi - lo; }
  bool operator==(const Arc&) const = default;
};

// ∂D minus finitely many disjoint open arcs. No removed arcs means the
// whole circle.
struct ArcSet {
  std::vector<Arc> removed;

  static ArcSet full_circle() { return {}; }

  // Build from kept arcs [θ1, θ2] (counterclockwise, radians).
  static ArcSet from_kept(std::vector<Arc> kept) {
    if (kept.empty()) throw InvalidInput("arc set needs at least one kept arc");
    for (auto& k : kept) {
      if (!(k.hi > k.lo)) throw InvalidInput("kept arc needs hi > lo");
      if (k.hi - k.lo >= 2.0 * pi) return full_circle();
      const double len = k.hi - k.lo;
      k.lo = wrap_angle(k.lo);
      k.hi = k.lo + len;
    }
    std::sort(kept.begin(), kept.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
    ArcSet s;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const Arc& cur = kept[i];
      const Arc& nxt = kept[(i + 1) % kept.size()];
      double start = cur.hi, stop = nxt.lo + (i + 1 == kept.size() ? 2.0 * pi : 0.0);
      if (!(stop > start)) throw InvalidInput("kept arcs overlap or touch");
      s.removed.push_back({wrap_angle(start), wrap_angle(start) + (stop - start)});
    }
    s.validate();
    return s;
  }

  void validate() const {
    double total = 0.0;
    for (const auto& r : removed) {
      if (!(r.hi > r.lo)) throw InvalidInput("empty removed arc");
      total += r.length();
    }
    if (total >= 2.0 * pi) throw InvalidInput("removed arcs cover the circle");
    for (std::size_t i = 0; i < removed.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (removed[i].contains(removed[j].lo + 1e-15) || removed[j].contains(removed[i].lo + 1e-15))
          throw InvalidInput("removed arcs overlap");
  }

  bool is_full() const { return removed.empty(); }

  std::vector<Arc> kept() const {
    if (removed.empty()) return {{0.0, 2.0 * pi}};
    auto r = removed;
    std::sort(r.begin(), r.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
    std::vector<Arc> out;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double start = r[i].hi;
      double stop = r[(i + 1) % r.size()].lo;
      while (stop <= start) stop += 2.0 * pi;
      out.push_back({start, stop});
    }
    return out;
  }

  bool contains(double t) const {
    for (const auto& r : removed) {
      const double off = wrap_angle(t - r.lo);
      if (off > 0.0 && off < r.length()) return false;
    }
    return true;
  }

  double measure() const {
    double m = 2.0 * pi;
    for (const auto& r : removed) m -= r.length();
    return m;
  }

  // Angular distance from e^{it} to the set.
  double distance(double t) const {
    if (contains(t)) return 0.0;
    double d = inf;
    for (const auto& k : kept()) {
      for (double e : {k.lo, k.hi}) {
        const double u = wrap_angle(t - e);
        d = std::min(d, std::min(u, 2.0 * pi - u));
      }
    }
    return d;
  }

  bool operator==(const ArcSet&) const = default;
};

}  // namespace refless
