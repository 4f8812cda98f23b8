#include "rcae/mekf.hpp"

#include <cmath>

namespace rcae {

void MekfConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("mekf: dt must be > 0");
  for (double v : {p0_attitude, p0_bias, r_gravity, r_mag, mag_field_magnitude}) {
    if (!(v > 0.0)) throw ConfigError("mekf: covariance scales must be > 0");
  }
  if (!(q_attitude >= 0.0) || !(q_bias >= 0.0)) {
    throw ConfigError("mekf: process noise must be >= 0");
  }
  if (ref_gravity.norm() < 1e-9 || ref_mag.norm() < 1e-9) {
    throw ConfigError("mekf: reference vectors must be nonzero");
  }
  if (ref_gravity.normalized().cross(ref_mag.normalized()).norm() < 1e-6) {
    throw ConfigError("mekf: reference vectors must not be parallel");
  }
}

MekfState MekfState::initial(const MekfConfig& cfg) {
  cfg.validate();
  MekfState s;
  s.p.setZero();
  s.p.topLeftCorner<3, 3>() = cfg.p0_attitude * Mat3::Identity();
  s.p.bottomRightCorner<3, 3>() = cfg.p0_bias * Mat3::Identity();
  return s;
}

MekfState mekf_predict(const MekfState& state, const Vec3& omega_meas,
                       const MekfConfig& cfg) {
  const Vec3 omega = omega_meas - state.bias;

  // Closed-form increment for exp_so3(-omega*dt) applied on the left.  No
  // renormalization: unit * unit stays unit to machine precision.
  const Vec3 rho = omega * cfg.dt;
  const double angle = rho.norm();
  UnitQuaternion dq;
  if (angle < 1e-12) {
    dq.eta = 1.0;
    dq.eps = rho / 2.0;
  } else {
    dq.eta = std::cos(angle / 2.0);
    dq.eps = std::sin(angle / 2.0) * (rho / angle);
  }

  MekfState next = state;
  next.q = quat_compose(dq, state.q);

  Mat6 f = Mat6::Identity();
  f.topLeftCorner<3, 3>() = exp_so3(-omega * cfg.dt).matrix();
  f.topRightCorner<3, 3>() = -cfg.dt * Mat3::Identity();

  Mat6 q = Mat6::Zero();
  q.topLeftCorner<3, 3>() = cfg.q_attitude * Mat3::Identity();
  q.bottomRightCorner<3, 3>() = cfg.q_bias * Mat3::Identity();

  next.p = f * state.p * f.transpose() + q * cfg.dt;
  next.p = ((next.p + next.p.transpose()) / 2.0).eval();
  return next;
}

MekfState mekf_update(const MekfState& state, const Vec3& accel, const Vec3& mag,
                      const MekfConfig& cfg) {
  if (accel.norm() < 1e-6 || mag.norm() < 1e-6) {
    throw Degenerate("mekf: near-zero direction measurement");
  }

  const OrientationMatrix o = state.orientation();
  const Vec3 pred_g = o * cfg.ref_gravity.normalized();
  const Vec3 pred_m = o * cfg.ref_mag.normalized();

  Vec6 y;
  y.head<3>() = accel.normalized() - pred_g;
  y.tail<3>() = mag.normalized() - pred_m;

  // meas - pred = (pred)^x * delta to first order, bias unobserved directly.
  Mat6 h = Mat6::Zero();
  h.topLeftCorner<3, 3>() = cross_matrix(pred_g);
  h.bottomLeftCorner<3, 3>() = cross_matrix(pred_m);

  // r_gravity is already per unit direction (accelerometer in g units);
  // r_mag is per raw field units and rescales onto the unit residual.
  const double r_mag_eff =
      cfg.r_mag / (cfg.mag_field_magnitude * cfg.mag_field_magnitude);
  Mat6 r = Mat6::Zero();
  r.topLeftCorner<3, 3>() = cfg.r_gravity * Mat3::Identity();
  r.bottomRightCorner<3, 3>() = r_mag_eff * Mat3::Identity();

  const Mat6 s = h * state.p * h.transpose() + r;
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(s);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(5);
  if (!(lmin > 0.0) || lmax > 1e12 * lmin) {
    throw SingularInnovation("mekf: innovation covariance numerically singular");
  }

  const Mat6 k = s.llt().solve(h * state.p).transpose();
  const Vec6 delta = k * y;

  MekfState next = state;
  next.q = matrix_to_quat(exp_so3(-delta.head<3>()) * o);
  next.bias = state.bias + delta.tail<3>();

  const Mat6 ikh = Mat6::Identity() - k * h;
  next.p = ikh * state.p * ikh.transpose() + k * r * k.transpose();
  next.p = ((next.p + next.p.transpose()) / 2.0).eval();
  return next;
}

}  // namespace rcae
