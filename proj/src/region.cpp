#include "tj/region.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tj/partition.hpp"

namespace tj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryTol = 1e-12;

std::vector<HalfPlane> polygon_planes(const std::vector<Vec2>& ccw) {
  std::vector<HalfPlane> out;
  for (std::size_t k = 0; k < ccw.size(); ++k) {
    const Vec2 a = ccw[k], b = ccw[(k + 1) % ccw.size()];
    const Vec2 n = perp(b - a);
    const double len = norm(n);
    out.push_back({n / len, dot(n / len, a)});
  }
  return out;
}

}  // namespace

Region Region::plane() { return Region{}; }

Region Region::disk(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  Region r;
  r.kind_ = Kind::Disk;
  r.size_ = radius;
  r.disk_center_ = center;
  r.disk_radius_ = radius;
  return r;
}

Region Region::annulus(Vec2 center, double inner, double outer) {
  if (!(inner >= 0.0) || !(outer > inner)) throw std::invalid_argument("annulus needs 0 <= inner < outer");
  Region r = disk(center, outer);
  r.kind_ = Kind::Annulus;
  r.hole_radius_ = inner;
  return r;
}

Region Region::rectangle(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("rectangle needs x0 < x1 and y0 < y1");
  Region r;
  r.kind_ = Kind::Rectangle;
  r.size_ = std::max(x1 - x0, y1 - y0);
  r.vertices_ = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  r.planes_ = polygon_planes(r.vertices_);
  return r;
}

Region Region::half_plane(Vec2 normal, double offset) {
  const double len = norm(normal);
  if (!(len > 0.0)) throw std::invalid_argument("half-plane normal must be nonzero");
  Region r;
  r.kind_ = Kind::HalfPlane;
  r.planes_.push_back({normal / len, offset / len});
  return r;
}

Region Region::triangle(double R, const TriodGeometry& frame) {
  if (!(R > 0.0)) throw std::invalid_argument("triangle size must be positive");
  const double s3 = std::sqrt(3.0);
  const std::vector<Vec2> local{{-2.0 * R, 0.0}, {R, -s3 * R}, {R, s3 * R}};
  Region r;
  r.kind_ = Kind::Triangle;
  r.size_ = R;
  for (const Vec2& v : local) r.vertices_.push_back(frame.center + rotate(v, frame.theta));
  r.planes_ = polygon_planes(r.vertices_);
  return r;
}

Region Region::clipped(HalfPlane h) const {
  Region r = *this;
  r.kind_ = Kind::Composite;
  const double len = norm(h.normal);
  r.planes_.push_back({h.normal / len, h.offset / len});
  return r;
}

Region Region::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("region scale factor must be positive");
  Region r = *this;
  r.size_ *= factor;
  if (r.disk_center_) *r.disk_center_ = factor * *r.disk_center_;
  r.disk_radius_ *= factor;
  r.hole_radius_ *= factor;
  for (HalfPlane& h : r.planes_) h.offset *= factor;
  for (Vec2& v : r.vertices_) v = factor * v;
  return r;
}

bool Region::contains(Vec2 z) const {
  if (disk_center_) {
    const double d2 = norm2(z - *disk_center_);
    if (d2 > disk_radius_ * disk_radius_) return false;
    if (hole_radius_ > 0.0 && d2 < hole_radius_ * hole_radius_) return false;
  }
  for (const HalfPlane& h : planes_)
    if (!h.contains(z)) return false;
  return true;
}

std::array<double, 4> Region::bounds() const {
  std::array<double, 4> b{-kInf, kInf, -kInf, kInf};
  if (disk_center_) {
    b = {disk_center_->x - disk_radius_, disk_center_->x + disk_radius_, disk_center_->y - disk_radius_,
         disk_center_->y + disk_radius_};
  }
  if (!vertices_.empty()) {
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const Vec2& v : vertices_) {
      x0 = std::min(x0, v.x);
      x1 = std::max(x1, v.x);
      y0 = std::min(y0, v.y);
      y1 = std::max(y1, v.y);
    }
    b = {std::max(b[0], x0), std::min(b[1], x1), std::max(b[2], y0), std::min(b[3], y1)};
  }
  return b;
}

double Region::max_radius(Vec2 origin) const {
  double r = kInf;
  if (disk_center_) r = distance(*disk_center_, origin) + disk_radius_;
  if (!vertices_.empty()) {
    double poly = 0.0;
    for (const Vec2& v : vertices_) poly = std::max(poly, distance(v, origin));
    r = std::min(r, poly);
  }
  return r;
}

double Region::clip_ray_length(Vec2 origin, Vec2 direction) const {
  if (hole_radius_ > 0.0) throw std::invalid_argument("clip_ray_length: region with a hole is not convex");
  const double dn = norm(direction);
  const Vec2 d = direction / dn;
  double lo = 0.0, hi = kInf;
  for (const HalfPlane& h : planes_) {
    const double nd = dot(h.normal, d);
    const double slack = dot(h.normal, origin) - h.offset;  // >= 0 at the origin when inside
    if (std::abs(nd) <= kBoundaryTol) {
      if (slack < -kBoundaryTol) return 0.0;
      continue;
    }
    const double s = -slack / nd;
    if (nd > 0.0)
      lo = std::max(lo, s);
    else
      hi = std::min(hi, s);
  }
  if (disk_center_) {
    const Vec2 o = origin - *disk_center_;
    const double b = dot(o, d);
    const double c = norm2(o) - disk_radius_ * disk_radius_;
    const double disc = b * b - c;
    if (disc <= 0.0) return 0.0;
    const double root = std::sqrt(disc);
    lo = std::max(lo, -b - root);
    hi = std::min(hi, -b + root);
  }
  return hi > lo ? hi - lo : 0.0;
}

std::string Region::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Plane:
      os << "plane";
      break;
    case Kind::Disk:
      os << "disk";
      break;
    case Kind::Annulus:
      os << "annulus";
      break;
    case Kind::Rectangle:
      os << "rectangle";
      break;
    case Kind::HalfPlane:
      os << "halfplane";
      break;
    case Kind::Triangle:
      os << "triangle";
      break;
    case Kind::Composite:
      os << "composite";
      break;
  }
  return os.str();
}

}  // namespace tj
