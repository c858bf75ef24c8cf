#include "tmb/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace tmb::geometry {

std::string to_string(Dir d) {
  if (d == kUp) return "up";
  if (d == kDown) return "down";
  if (d == kLeft) return "left";
  if (d == kRight) return "right";
  return "(" + std::to_string(d.dx) + "," + std::to_string(d.dy) + ")";
}

std::string to_string(WallRole r) {
  switch (r) {
    case WallRole::Mirror: return "mirror";
    case WallRole::Launch: return "launch";
    case WallRole::Halt: return "halt";
  }
  return "?";
}

Wall place(const Placement& pl, const Wall& w) {
  Wall out{w.key, w.shape, w.role};
  if (const auto* s = std::get_if<Segment>(&w.shape)) {
    out.shape = Segment{pl.apply(s->a), pl.apply(s->b)};
  } else {
    auto arc = std::get<ParabolaArc>(w.shape);
    arc.vertex = pl.apply(arc.vertex);
    if (pl.mirror) {
      Rational lo = -arc.xhi, hi = -arc.xlo;
      arc.xlo = lo + pl.dx;
      arc.xhi = hi + pl.dx;
    } else {
      arc.xlo += pl.dx;
      arc.xhi += pl.dx;
    }
    out.shape = arc;
  }
  return out;
}

Wall flip_vertical(const Wall& w, const Rational& h) {
  Wall out{w.key, w.shape, w.role};
  if (const auto* s = std::get_if<Segment>(&w.shape)) {
    out.shape = Segment{{s->a.x, h - s->a.y}, {s->b.x, h - s->b.y}};
  } else {
    auto arc = std::get<ParabolaArc>(w.shape);
    arc.vertex.y = h - arc.vertex.y;
    arc.opening = -arc.opening;
    out.shape = arc;
  }
  return out;
}

void BBox::include(const BBox& o) {
  xlo = std::min(xlo, o.xlo);
  ylo = std::min(ylo, o.ylo);
  xhi = std::max(xhi, o.xhi);
  yhi = std::max(yhi, o.yhi);
}

void BBox::include(const Point& p) {
  xlo = std::min(xlo, p.x);
  ylo = std::min(ylo, p.y);
  xhi = std::max(xhi, p.x);
  yhi = std::max(yhi, p.y);
}

BBox bbox_of(const Segment& s) {
  return {std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y), std::max(s.a.x, s.b.x), std::max(s.a.y, s.b.y)};
}

BBox bbox_of(const Wall& w) {
  if (const auto* s = std::get_if<Segment>(&w.shape)) return bbox_of(*s);
  const auto& a = std::get<ParabolaArc>(w.shape);
  Rational y1 = a.y_at(a.xlo), y2 = a.y_at(a.xhi);
  Rational lo = std::min(y1, y2), hi = std::max(y1, y2);
  if (a.xlo <= a.vertex.x && a.vertex.x <= a.xhi) {
    lo = std::min(lo, a.vertex.y);
    hi = std::max(hi, a.vertex.y);
  }
  return {a.xlo, lo, a.xhi, hi};
}

Point reflect(const Point& v, const Point& t) {
  // v' = 2 (v.t / t.t) t - v
  const Rational tt = t.x * t.x + t.y * t.y;
  const Rational k = 2 * (v.x * t.x + v.y * t.y) / tt;
  return {k * t.x - v.x, k * t.y - v.y};
}

int orient(const Point& a, const Point& b, const Point& c) {
  const Rational v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return sign(v);
}

namespace {

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

/// Whether quadratic q(t) = c2 t^2 + c1 t + c0 has a root in [lo, hi].
bool quadratic_root_in(const Rational& c2, const Rational& c1, const Rational& c0, const Rational& lo,
                       const Rational& hi) {
  if (hi < lo) return false;
  auto q = [&](const Rational& t) { return (c2 * t + c1) * t + c0; };
  const int s_lo = sign(q(lo)), s_hi = sign(q(hi));
  if (s_lo == 0 || s_hi == 0 || s_lo != s_hi) return true;
  if (c2 == 0) return false;
  const Rational tv = -c1 / (2 * c2);
  if (tv <= lo || tv >= hi) return false;
  return sign(q(tv)) != s_lo;
}

bool segment_meets_arc(const Segment& s, const ParabolaArc& a) {
  // Points of s: P(t) = s.a + t (s.b - s.a), t in [0,1].
  const Rational dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  Rational lo = 0, hi = 1;
  if (dx == 0) {
    if (s.a.x < a.xlo || s.a.x > a.xhi) return false;
  } else {
    Rational t1 = (a.xlo - s.a.x) / dx, t2 = (a.xhi - s.a.x) / dx;
    if (t2 < t1) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  }
  // g(t) = y(t) - f(x(t)), f(x) = vy + o (x - vx)^2 / (4p)
  const Rational k = Rational(a.opening) / (4 * a.p);
  const Rational ex = s.a.x - a.vertex.x;
  const Rational c2 = -k * dx * dx;
  const Rational c1 = dy - 2 * k * ex * dx;
  const Rational c0 = s.a.y - a.vertex.y - k * ex * ex;
  return quadratic_root_in(c2, c1, c0, lo, hi);
}

bool arc_meets_arc(const ParabolaArc& a, const ParabolaArc& b) {
  const Rational lo = std::max(a.xlo, b.xlo), hi = std::min(a.xhi, b.xhi);
  if (hi < lo) return false;
  const Rational ka = Rational(a.opening) / (4 * a.p), kb = Rational(b.opening) / (4 * b.p);
  // a(x) - b(x) as a polynomial in x
  const Rational c2 = ka - kb;
  const Rational c1 = -2 * ka * a.vertex.x + 2 * kb * b.vertex.x;
  const Rational c0 = ka * a.vertex.x * a.vertex.x + a.vertex.y - kb * b.vertex.x * b.vertex.x - b.vertex.y;
  return quadratic_root_in(c2, c1, c0, lo, hi);
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
  const int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0) {
    if (o1 != 0 || o2 != 0) return true;
  }
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

bool segment_meets_convex(const Segment& s, const std::vector<Point>& poly) {
  if (poly.size() < 3) throw std::invalid_argument("polygon needs three vertices");
  auto inside = [&](const Point& p) {
    int seen = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const int o = orient(poly[i], poly[(i + 1) % poly.size()], p);
      if (o == 0) continue;
      if (seen == 0) seen = o;
      else if (o != seen) return false;
    }
    return true;
  };
  if (inside(s.a) || inside(s.b)) return true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (segments_intersect(s, Segment{poly[i], poly[(i + 1) % poly.size()]})) return true;
  }
  return false;
}

bool walls_intersect(const Wall& a, const Wall& b) {
  if (!bbox_of(a).overlaps(bbox_of(b))) return false;
  const auto* sa = std::get_if<Segment>(&a.shape);
  const auto* sb = std::get_if<Segment>(&b.shape);
  if (sa && sb) return segments_intersect(*sa, *sb);
  if (sa) return segment_meets_arc(*sa, std::get<ParabolaArc>(b.shape));
  if (sb) return segment_meets_arc(*sb, std::get<ParabolaArc>(a.shape));
  return arc_meets_arc(std::get<ParabolaArc>(a.shape), std::get<ParabolaArc>(b.shape));
}

}  // namespace tmb::geometry
