#pragma once

// Shared fixtures and independent oracles for the test suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "crowdverify/geometry.hpp"

namespace testsupport {

using crowdverify::Building;
using crowdverify::Point2;
using crowdverify::Point3;

inline Building box(double x0, double y0, double x1, double y1, double h) {
  return Building{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, h};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Crossing-number point-in-polygon; boundary handling is irrelevant for
// the oracle since grazing points are excluded by the tolerance band.
inline bool inside_polygon(const std::vector<Point2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

inline double edge_distance(const std::vector<Point2>& poly, double x, double y) {
  double best = INFINITY;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double ex = poly[i].x - poly[j].x, ey = poly[i].y - poly[j].y;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0 ? ((x - poly[j].x) * ex + (y - poly[j].y) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(x - (poly[j].x + t * ex), y - (poly[j].y + t * ey)));
  }
  return best;
}

// Depth of a point inside a building volume, 0 when outside.
inline double penetration(const std::vector<Building>& buildings, const Point3& p) {
  double depth = 0.0;
  for (const auto& b : buildings) {
    if (p.z <= 0.0 || p.z >= b.height || !inside_polygon(b.footprint, p.x, p.y)) continue;
    depth = std::max(depth, std::min({edge_distance(b.footprint, p.x, p.y), b.height - p.z, p.z}));
  }
  return depth;
}

// Samples the open segment at a fixed step; returns the deepest penetration.
inline double march_depth(const std::vector<Building>& buildings, const Point3& a, const Point3& b, double step) {
  const double len = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) + (b.z - a.z) * (b.z - a.z));
  const int n = std::max(2, static_cast<int>(std::ceil(len / step)));
  double depth = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    depth = std::max(depth, penetration(buildings, {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)}));
  }
  return depth;
}

// Random convex CCW polygon inside [cx-r, cx+r]^2.
inline Building random_convex(std::mt19937_64& rng, double cx, double cy, double r, double h) {
  const int n = std::uniform_int_distribution<int>(3, 7)(rng);
  const double phase = uniform(rng, 0.0, 2 * M_PI);
  std::vector<double> ang;
  for (int i = 0; i < n; ++i) ang.push_back(phase + 2 * M_PI * (i + uniform(rng, 0.0, 0.5)) / n);
  Building b;
  b.height = h;
  for (double a : ang) b.footprint.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  return b;
}

}  // namespace testsupport
