#pragma once

#include "rcae/so3.hpp"

// Multiplicative extended Kalman filter over a 6-dimensional error state
// [attitude error; gyro bias error].  The attitude error delta is defined by
// O_true = exp_so3(-delta) * O_est, i.e. a small left-multiplied rotation in
// the body frame, matching the propagation convention used everywhere else.

namespace rcae {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct MekfConfig {
  double dt = 0.01;

  double p0_attitude = 1e4;  // initial error covariance, attitude block
  double p0_bias = 1e4;      // initial error covariance, bias block
  double q_attitude = 1.0;   // process noise density, attitude block
  double q_bias = 1e-4;      // process noise density, bias block

  // Measurement noise variances in raw sensor units.  The update works on
  // unit direction residuals, so each variance is divided by the square of
  // the expected raw magnitude: accelerometer readings are taken in g units
  // (magnitude 1, r_gravity applies as-is) and magnetometer readings in field
  // units of magnitude mag_field_magnitude (a mid-latitude field is about
  // 50 uT, making r_mag = 100 an (10 uT)^2 noise floor).
  double r_gravity = 0.01;
  double r_mag = 100.0;
  double mag_field_magnitude = 50.0;

  // Reference directions in the reference frame (unit vectors).  Gravity
  // points along +z; the magnetic field sits in the x-z plane at a 60 degree
  // dip by default.
  Vec3 ref_gravity = Vec3(0.0, 0.0, 1.0);
  Vec3 ref_mag = Vec3(0.5, 0.0, 0.8660254037844386);

  void validate() const;
};

struct MekfState {
  UnitQuaternion q;            // attitude estimate
  Vec3 bias = Vec3::Zero();    // gyro bias estimate, rad/s
  Mat6 p = Mat6::Identity();

  static MekfState initial(const MekfConfig& cfg);

  OrientationMatrix orientation() const { return quat_to_matrix(q); }
};

// Propagates attitude with the bias-corrected rate and inflates the
// covariance: P <- F P F^T + Q*dt.
MekfState mekf_predict(const MekfState& state, const Vec3& omega_meas,
                       const MekfConfig& cfg);

// Corrects attitude and bias from body-frame gravity and magnetic direction
// measurements (normalized internally; only directions matter).  Joseph-form
// covariance update.  Throws Degenerate on near-zero inputs and
// SingularInnovation if the innovation covariance is numerically singular.
MekfState mekf_update(const MekfState& state, const Vec3& accel, const Vec3& mag,
                      const MekfConfig& cfg);

}  // namespace rcae
