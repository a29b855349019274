#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace radalloc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Measurement precision of a radar in its own polar frame.
struct PolarNoise {
  double sigma_r = 2.0;       // std dev in range [m]
  double sigma_theta = 2e-3;  // std dev in azimuth [rad], about 0.11 deg
};

namespace detail {

struct EigenAxes {
  Vec2 major;       // unit eigenvector of the larger eigenvalue
  Vec2 minor;       // right-handed perpendicular
  double lambda_major = 0.0;
  double lambda_minor = 0.0;
};

// Closed-form eigendecomposition of a 2x2 symmetric matrix with a fixed
// sign convention so that equal inputs always produce equal axes.
inline EigenAxes symmetric_eigen(const Mat2& m) {
  const double a = m(0, 0);
  const double b = m(0, 1);
  const double c = m(1, 1);
  const double half_tr = 0.5 * (a + c);
  const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);

  EigenAxes axes;
  axes.lambda_major = half_tr + disc;
  axes.lambda_minor = half_tr - disc;

  Vec2 v;
  if (b != 0.0) {
    v = Vec2(b, axes.lambda_major - a).normalized();
  } else {
    v = (a >= c) ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
  }
  if (v.x() < 0.0 || (v.x() == 0.0 && v.y() < 0.0)) {
    v = -v;
  }
  axes.major = v;
  axes.minor = Vec2(-v.y(), v.x());
  return axes;
}

}  // namespace detail

// Confidence ellipse of a 2-d Gaussian position estimate:
//   { p : (p - center)^T shape^-1 (p - center) <= scale^2 }.
// shape is the 2x2 position covariance, scale the confidence multiplier
// (scale = 2 gives the usual 2-sigma region).
class Ellipse {
public:
  // Vertex count of the inscribed polygon used for intersection areas.
  // 128 keeps the area error of moderately overlapping circle pairs under
  // half a percent.
  static constexpr int kBoundaryVertices = 128;
  static constexpr double kMaxConditionNumber = 1e12;

  Ellipse(const Vec2& center, const Mat2& shape, double scale)
      : center_(center), scale_(scale) {
    // Store the symmetric part once; callers may pass matrices carrying
    // round-off asymmetry from upstream filtering.
    shape_(0, 0) = shape(0, 0);
    shape_(1, 1) = shape(1, 1);
    shape_(0, 1) = shape_(1, 0) = 0.5 * (shape(0, 1) + shape(1, 0));
    validate();
  }

  const Vec2& center() const { return center_; }
  const Mat2& shape() const { return shape_; }
  double scale() const { return scale_; }

  double area() const {
    return std::numbers::pi * scale_ * scale_ * std::sqrt(shape_.determinant());
  }

  bool contains(const Vec2& p) const {
    const Vec2 d = p - center_;
    const double det = shape_.determinant();
    // Explicit 2x2 inverse of the quadratic form.
    const double q = (d.x() * (shape_(1, 1) * d.x() - shape_(0, 1) * d.y()) +
                      d.y() * (shape_(0, 0) * d.y() - shape_(0, 1) * d.x())) /
                     det;
    return q <= scale_ * scale_;
  }

  // Inscribed polygon, counter-clockwise, anchored to the principal axes so
  // that rotating the ellipse rotates the polygon with it.
  std::vector<Vec2> boundary_polygon(int n = kBoundaryVertices) const {
    const auto axes = detail::symmetric_eigen(shape_);
    const Vec2 u = scale_ * std::sqrt(axes.lambda_major) * axes.major;
    const Vec2 v = scale_ * std::sqrt(axes.lambda_minor) * axes.minor;
    std::vector<Vec2> poly;
    poly.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
      poly.push_back(center_ + std::cos(t) * u + std::sin(t) * v);
    }
    return poly;
  }

  // Axis-aligned bounding box, half-widths scale * sqrt(diag(shape)).
  std::array<double, 4> bounding_box() const {  // {xmin, ymin, xmax, ymax}
    const double hx = scale_ * std::sqrt(shape_(0, 0));
    const double hy = scale_ * std::sqrt(shape_(1, 1));
    return {center_.x() - hx, center_.y() - hy, center_.x() + hx,
            center_.y() + hy};
  }

  bool identical_to(const Ellipse& o) const {
    return center_ == o.center_ && shape_ == o.shape_ && scale_ == o.scale_;
  }

  // Strict weak order used to make intersection_area independent of
  // argument order.
  bool before(const Ellipse& o) const {
    const double lhs[6] = {center_.x(), center_.y(), shape_(0, 0),
                           shape_(0, 1), shape_(1, 1), scale_};
    const double rhs[6] = {o.center_.x(), o.center_.y(), o.shape_(0, 0),
                           o.shape_(0, 1), o.shape_(1, 1), o.scale_};
    for (int i = 0; i < 6; ++i) {
      if (lhs[i] != rhs[i]) return lhs[i] < rhs[i];
    }
    return false;
  }

private:
  void validate() const {
    if (!(scale_ > 0.0)) {
      throw std::domain_error("Ellipse: scale must be positive");
    }
    const auto axes = detail::symmetric_eigen(shape_);
    if (!(axes.lambda_minor > 0.0)) {
      throw std::domain_error("Ellipse: shape must be positive definite");
    }
    if (axes.lambda_major > kMaxConditionNumber * axes.lambda_minor) {
      throw std::domain_error("Ellipse: shape is numerically singular");
    }
  }

  Vec2 center_;
  Mat2 shape_;
  double scale_;
};

inline double ellipse_area(const Ellipse& e) { return e.area(); }

inline bool ellipse_contains(const Ellipse& e, const Vec2& p) {
  return e.contains(p);
}

// Covariance of one polar measurement expressed in the world frame:
//   R(theta) diag(sigma_r^2, (r sigma_theta)^2) R(theta)^T,
// the azimuth deviation linearized to arc length. theta is the azimuth
// measured clockwise from the +x axis, so R(theta) = [[c, s], [-s, c]].
inline Mat2 measurement_covariance(double r, double theta,
                                   const PolarNoise& noise) {
  if (!(r > 0.0)) {
    throw std::domain_error("measurement_covariance: range must be positive");
  }
  if (!(noise.sigma_r > 0.0) || !(noise.sigma_theta > 0.0)) {
    throw std::domain_error("measurement_covariance: noise must be positive");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double vr = noise.sigma_r * noise.sigma_r;
  const double vt = (r * noise.sigma_theta) * (r * noise.sigma_theta);
  Mat2 cov;
  cov(0, 0) = vr * c * c + vt * s * s;
  cov(1, 1) = vr * s * s + vt * c * c;
  cov(0, 1) = cov(1, 0) = -(vr - vt) * c * s;
  return cov;
}

namespace detail {

inline double shoelace_area(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    twice += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  }
  return 0.5 * std::fabs(twice);
}

// Sutherland-Hodgman clip of a convex subject polygon against a convex
// CCW clip polygon. Exact for convex inputs.
inline std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject,
                                     const std::vector<Vec2>& clip) {
  std::vector<Vec2> output = subject;
  std::vector<Vec2> input;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    const Vec2 edge = b - a;
    input.swap(output);
    output.clear();

    auto side = [&](const Vec2& p) {
      return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x());
    };
    auto cross_point = [&](const Vec2& p, const Vec2& q) {
      const double dp = side(p);
      const double dq = side(q);
      const double t = dp / (dp - dq);
      return Vec2(p + t * (q - p));
    };

    Vec2 prev = input.back();
    double prev_side = side(prev);
    for (const Vec2& cur : input) {
      const double cur_side = side(cur);
      if (cur_side >= 0.0) {
        if (prev_side < 0.0) {
          output.push_back(cross_point(prev, cur));
        }
        output.push_back(cur);
      } else if (prev_side >= 0.0) {
        output.push_back(cross_point(prev, cur));
      }
      prev = cur;
      prev_side = cur_side;
    }
  }
  return output;
}

}  // namespace detail

// Area of the intersection region of two confidence ellipses. Each boundary
// is approximated by an inscribed 64-gon and the two convex polygons are
// clipped against each other; identical ellipses short-circuit to the exact
// area. Arguments are ordered canonically first, so the result is
// bit-identical under argument swap.
inline double intersection_area(const Ellipse& a, const Ellipse& b) {
  if (a.identical_to(b)) {
    return a.area();
  }
  const Ellipse& first = b.before(a) ? b : a;
  const Ellipse& second = b.before(a) ? a : b;

  // Cheap separation test on the bounding boxes.
  const auto ba = first.bounding_box();
  const auto bb = second.bounding_box();
  if (ba[2] < bb[0] || bb[2] < ba[0] || ba[3] < bb[1] || bb[3] < ba[1]) {
    return 0.0;
  }

  const auto pa = first.boundary_polygon();
  const auto pb = second.boundary_polygon();
  return detail::shoelace_area(detail::clip_convex(pa, pb));
}

}  // namespace radalloc
