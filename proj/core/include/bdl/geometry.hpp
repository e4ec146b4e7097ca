#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bdl {

// A d-dimensional point with a stable identity. Coordinates are doubles and
// are expected to be finite; ids are assigned at ingestion (dataset row) and
// carried unchanged through every structure.
template <int D>
struct Point {
  std::array<double, D> x{};
  std::uint32_t id = 0;
};

template <int D>
inline bool coords_equal(const Point<D>& a, const Point<D>& b) {
  for (int c = 0; c < D; ++c) {
    if (a.x[c] != b.x[c]) return false;
  }
  return true;
}

template <int D>
inline double squared_distance(const Point<D>& a, const Point<D>& b) {
  double r = 0;
  for (int c = 0; c < D; ++c) {
    const double d = a.x[c] - b.x[c];
    r += d * d;
  }
  return r;
}

// Axis-aligned bounding box. The empty box uses lo=+inf / hi=-inf sentinels
// so that extension needs no emptiness branch.
template <int D>
struct BoundingBox {
  std::array<double, D> lo{};
  std::array<double, D> hi{};

  static BoundingBox empty() {
    BoundingBox b;
    b.lo.fill(std::numeric_limits<double>::infinity());
    b.hi.fill(-std::numeric_limits<double>::infinity());
    return b;
  }

  bool is_empty() const { return lo[0] > hi[0]; }

  void extend(const Point<D>& p) {
    for (int c = 0; c < D; ++c) {
      lo[c] = p.x[c] < lo[c] ? p.x[c] : lo[c];
      hi[c] = p.x[c] > hi[c] ? p.x[c] : hi[c];
    }
  }

  void extend(const BoundingBox& o) {
    for (int c = 0; c < D; ++c) {
      lo[c] = o.lo[c] < lo[c] ? o.lo[c] : lo[c];
      hi[c] = o.hi[c] > hi[c] ? o.hi[c] : hi[c];
    }
  }

  bool contains(const Point<D>& p) const {
    for (int c = 0; c < D; ++c) {
      if (p.x[c] < lo[c] || p.x[c] > hi[c]) return false;
    }
    return true;
  }

  // Squared distance from q to the nearest point of the box (0 if inside).
  double min_dist2(const Point<D>& q) const {
    double r = 0;
    for (int c = 0; c < D; ++c) {
      if (q.x[c] < lo[c]) {
        const double d = lo[c] - q.x[c];
        r += d * d;
      } else if (q.x[c] > hi[c]) {
        const double d = q.x[c] - hi[c];
        r += d * d;
      }
    }
    return r;
  }

  // Squared distance from q to the farthest point of the box.
  double max_dist2(const Point<D>& q) const {
    double r = 0;
    for (int c = 0; c < D; ++c) {
      const double a = q.x[c] - lo[c];
      const double b = hi[c] - q.x[c];
      const double d = a > b ? a : b;  // >= 0 for any non-empty box
      r += d * d;
    }
    return r;
  }
};

enum class BoxSphere { Disjoint, Contained, Intersecting };

// Relation between a box and the sphere of squared radius r2 around center:
// Disjoint iff the nearest box point lies strictly outside, Contained iff the
// farthest box point lies inside or on the sphere.
template <int D>
inline BoxSphere box_sphere_relation(const BoundingBox<D>& box,
                                     const Point<D>& center, double r2) {
  if (box.min_dist2(center) > r2) return BoxSphere::Disjoint;
  if (box.max_dist2(center) <= r2) return BoxSphere::Contained;
  return BoxSphere::Intersecting;
}

}  // namespace bdl
