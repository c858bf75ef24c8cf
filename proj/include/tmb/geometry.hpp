#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tmb/exact.hpp"

namespace tmb::geometry {

struct Point {
  Rational x;
  Rational y;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned unit vector.
struct Dir {
  int dx{0};
  int dy{1};
  friend bool operator==(const Dir&, const Dir&) = default;
  Dir operator-() const { return {-dx, -dy}; }
};

inline constexpr Dir kUp{0, 1};
inline constexpr Dir kDown{0, -1};
inline constexpr Dir kLeft{-1, 0};
inline constexpr Dir kRight{1, 0};

std::string to_string(Dir d);

inline Point operator+(const Point& p, const Point& q) { return {p.x + q.x, p.y + q.y}; }
inline Point operator-(const Point& p, const Point& q) { return {p.x - q.x, p.y - q.y}; }
inline Point operator*(const Rational& s, const Point& p) { return {s * p.x, s * p.y}; }
inline Point along(const Point& p, Dir d, const Rational& s) { return {p.x + s * d.dx, p.y + s * d.dy}; }
inline Rational dot(const Point& p, Dir d) { return p.x * d.dx + p.y * d.dy; }

/// A beam entry or exit: rays travel along `travel`; transverse value u sits at
/// origin + u * axis. Values of the beam lie in [lo, hi].
struct Port {
  Point origin;
  Dir travel{kUp};
  Dir axis{kRight};
  Rational lo;
  Rational hi;

  Point at(const Rational& u) const { return along(origin, axis, u); }
  /// Transverse value of a point (its projection on the axis).
  Rational value_of(const Point& p) const { return dot(p - origin, axis); }
};

/// Rigid motion used to place gadgets: optional mirror x -> -x, then translation.
struct Placement {
  bool mirror{false};
  Rational dx;
  Rational dy;

  Point apply(const Point& p) const { return {(mirror ? -p.x : p.x) + dx, p.y + dy}; }
  Dir apply(Dir d) const { return {mirror ? -d.dx : d.dx, d.dy}; }
  Port apply(const Port& p) const { return {apply(p.origin), apply(p.travel), apply(p.axis), p.lo, p.hi}; }
};

struct Segment {
  Point a;
  Point b;
};

/// Arc of y = vertex.y + opening * (x - vertex.x)^2 / (4 p), x in [xlo, xhi].
/// Focus sits at vertex + opening * (0, p).
struct ParabolaArc {
  Point vertex;
  Rational p;
  int opening{1};
  Rational xlo;
  Rational xhi;

  Rational y_at(const Rational& x) const {
    const Rational dx = x - vertex.x;
    return vertex.y + Rational(opening) * dx * dx / (4 * p);
  }
  Point focus() const { return {vertex.x, vertex.y + Rational(opening) * p}; }
};

enum class WallRole { Mirror, Launch, Halt };

std::string to_string(WallRole r);

struct Wall {
  std::string key;
  std::variant<Segment, ParabolaArc> shape;
  WallRole role{WallRole::Mirror};
};

Wall place(const Placement& pl, const Wall& w);
/// Mirror across the horizontal line y = h/2 (y -> h - y).
Wall flip_vertical(const Wall& w, const Rational& h);

struct BBox {
  Rational xlo, ylo, xhi, yhi;
  bool overlaps(const BBox& o) const { return !(xhi < o.xlo || o.xhi < xlo || yhi < o.ylo || o.yhi < ylo); }
  void include(const BBox& o);
  void include(const Point& p);
};

BBox bbox_of(const Wall& w);
BBox bbox_of(const Segment& s);

/// Exact reflection of direction v across a line with direction t.
Point reflect(const Point& v, const Point& t);

/// Signed orientation of (b - a) x (c - a).
int orient(const Point& a, const Point& b, const Point& c);
/// Closed segment intersection test, exact.
bool segments_intersect(const Segment& s, const Segment& t);
/// Whether segment s meets the closed convex polygon (vertices in order).
bool segment_meets_convex(const Segment& s, const std::vector<Point>& poly);

/// Exact segment/segment and arc checks; arcs are compared conservatively by bounding boxes.
bool walls_intersect(const Wall& a, const Wall& b);

}  // namespace tmb::geometry
