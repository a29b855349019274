#pragma once

#include "radalloc/geometry.hpp"
#include "radalloc/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace radalloc {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// One radar's Kalman knowledge of one target: planar position and velocity
// with a constant-velocity motion model.
struct TrackState {
  Vec4 state = Vec4::Zero();       // x [m], y [m], vx [m/s], vy [m/s]
  Mat4 covariance = Mat4::Zero();
  long last_update = 0;            // time step of the last measurement fold-in

  Vec2 position() const { return state.head<2>(); }
  Vec2 velocity() const { return state.tail<2>(); }
  Mat2 position_covariance() const { return covariance.topLeftCorner<2, 2>(); }
};

struct RadarParams {
  Vec2 position = Vec2::Zero();    // [m]
  double range_max = 12000.0;      // [m]
  PolarNoise noise;
  double snr = 13.0;               // nominal operating point
  double budget = 4.0;             // L_t, radar-time units per step
  double process_noise_intensity = 0.5;  // q [m^2/s^3]
};

struct Measurement {
  Vec2 z;    // Cartesian position measurement [m]
  Mat2 cov;  // measurement covariance in the world frame
};

namespace detail {

inline Mat4 cv_transition(double dt) {
  Mat4 f = Mat4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

// White-noise-acceleration process covariance, per-axis blocks
// q * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
inline Mat4 cv_process_noise(double dt, double q) {
  const double d3 = dt * dt * dt / 3.0;
  const double d2 = dt * dt / 2.0;
  Mat4 qm = Mat4::Zero();
  qm(0, 0) = qm(1, 1) = q * d3;
  qm(2, 2) = qm(3, 3) = q * dt;
  qm(0, 2) = qm(2, 0) = q * d2;
  qm(1, 3) = qm(3, 1) = q * d2;
  return qm;
}

inline void symmetrize(Mat4& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace detail

inline TrackState predict(const TrackState& t, double dt, double q) {
  if (!(dt > 0.0)) {
    throw std::domain_error("predict: dt must be positive");
  }
  const Mat4 f = detail::cv_transition(dt);
  TrackState out = t;
  out.state = f * t.state;
  out.covariance = f * t.covariance * f.transpose() +
                   detail::cv_process_noise(dt, q);
  detail::symmetrize(out.covariance);
  return out;
}

// Standard Kalman update observing (x, y). Joseph form keeps the posterior
// covariance symmetric PSD.
inline TrackState update(const TrackState& t, const Vec2& z, const Mat2& rm,
                         long now = -1) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;

  const Mat2 innovation_cov = h * t.covariance * h.transpose() + rm;
  const double det = innovation_cov.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw std::runtime_error("update: singular innovation covariance");
  }
  const Eigen::Matrix<double, 4, 2> gain =
      t.covariance * h.transpose() * innovation_cov.inverse();

  TrackState out = t;
  out.state = t.state + gain * (z - h * t.state);
  const Mat4 ikh = Mat4::Identity() - gain * h;
  out.covariance =
      ikh * t.covariance * ikh.transpose() + gain * rm * gain.transpose();
  detail::symmetrize(out.covariance);
  out.last_update = (now >= 0) ? now : t.last_update;
  return out;
}

inline Ellipse prediction_ellipse(const TrackState& t, double scale) {
  return Ellipse(t.position(), t.position_covariance(), scale);
}

// Initial velocity std dev for a single-plot track, (50 m/s)^2 variance.
constexpr double kInitVelocityVariance = 2500.0;

inline TrackState init_track(const Measurement& m, long now) {
  TrackState t;
  t.state.head<2>() = m.z;
  t.covariance.topLeftCorner<2, 2>() = m.cov;
  t.covariance(2, 2) = kInitVelocityVariance;
  t.covariance(3, 3) = kInitVelocityVariance;
  t.last_update = now;
  return t;
}

// Effective measurement noise at the configured signal-to-noise ratio.
// 13 is the nominal operating point; precision scales as 1/sqrt(snr/13).
inline PolarNoise effective_noise(const RadarParams& radar) {
  const double k = 1.0 / std::sqrt(radar.snr / 13.0);
  return PolarNoise{radar.noise.sigma_r * k, radar.noise.sigma_theta * k};
}

// Azimuth of a world-frame offset, clockwise from +x, matching the
// measurement_covariance convention.
inline double azimuth_of(const Vec2& offset) {
  return std::atan2(-offset.y(), offset.x());
}

// One noisy plot of the true target position, or nothing when the target
// is out of range. Deterministic given the rng state.
inline std::optional<Measurement> measure(const RadarParams& radar,
                                          const Vec2& truth, Rng& rng) {
  const Vec2 offset = truth - radar.position;
  const double r = offset.norm();
  if (r > radar.range_max) {
    return std::nullopt;
  }
  const Mat2 cov = measurement_covariance(r, azimuth_of(offset),
                                          effective_noise(radar));
  const Eigen::LLT<Mat2> llt(cov);
  const Vec2 noise = llt.matrixL() * Vec2(rng.normal(), rng.normal());
  return Measurement{truth + noise, cov};
}

}  // namespace radalloc
