#pragma once

#include <cstdint>
#include <utility>

#include "rcae/rls.hpp"
#include "rcae/so3.hpp"

// Adaptive attitude estimator.
//
// Given a gyro sample w_k and an independently measured orientation O_meas,
// one step compares the current estimate against the measurement through the
// relative rotation rel = O_est * O_meas^T, summarizes the disagreement as
// the scalar z_k = tr(rel) - 3, adapts PID-like gains theta by retrospective
// least squares, and applies the resulting correction u_k about the eigenaxis
// of rel while propagating with the gyro:
//   O_est <- exp_so3(-(w_k*dt + eta_k)) * O_est,   eta_k = u_k * axis(rel).

namespace rcae {

struct RcaeConfig {
  double dt = 0.01;            // seconds between steps
  double gamma_limit = 100.0;  // anti-windup clamp on the accumulated error
  RlsConfig rls;               // l_theta must stay 3 (proportional, sum, difference)
  OrientationMatrix initial_estimate;  // identity by default

  void validate() const;
};

struct RcaeState {
  OrientationMatrix estimate;
  RlsState rls;
  double gamma = 0.0;   // clamped running sum of z
  double z_prev = 0.0;  // previous error, for the difference term
  double u_prev = 0.0;  // correction applied on the previous step
  std::int64_t step = 0;

  static RcaeState initial(const RcaeConfig& cfg);
};

struct RcaeTelemetry {
  double z = 0.0;
  double u = 0.0;
  Eigen::Vector3d gains = Eigen::Vector3d::Zero();  // theta after adaptation
  Vec3 eta = Vec3::Zero();
};

// u about the eigenaxis of rel; zero vector when the relative rotation is too
// small to define an axis.
Vec3 correction_signal(double u, const OrientationMatrix& rel);

// One full measurement step.
std::pair<RcaeState, RcaeTelemetry> rcae_step(const RcaeState& state,
                                              const Vec3& omega_meas,
                                              const OrientationMatrix& meas,
                                              const RcaeConfig& cfg);

// Propagation-only step for samples with no usable orientation measurement:
// gains, histories and error accumulators are left untouched.
RcaeState rcae_propagate(const RcaeState& state, const Vec3& omega_meas,
                         const RcaeConfig& cfg);

// Pure gyro integration, O <- exp_so3(-w*dt) * O.
OrientationMatrix dead_reckon_step(const OrientationMatrix& o, const Vec3& omega,
                                   double dt);

}  // namespace rcae
