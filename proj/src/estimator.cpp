#include "rcae/estimator.hpp"

#include <algorithm>

namespace rcae {

namespace {
constexpr std::int64_t kReprojectEvery = 1000;
}

void RcaeConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("rcae: dt must be > 0");
  if (!(gamma_limit > 0.0)) throw ConfigError("rcae: gamma_limit must be > 0");
  if (rls.l_theta != 3) throw ConfigError("rcae: regressor is fixed to 3 terms");
  rls.validate();
}

RcaeState RcaeState::initial(const RcaeConfig& cfg) {
  cfg.validate();
  RcaeState s;
  s.estimate = cfg.initial_estimate;
  s.rls = RlsState::initial(cfg.rls);
  return s;
}

Vec3 correction_signal(double u, const OrientationMatrix& rel) {
  const AxisAngle aa = axis_angle(rel);
  if (aa.angle < kDegenerateAngle) {
    return Vec3::Zero();
  }
  return u * aa.axis;
}

std::pair<RcaeState, RcaeTelemetry> rcae_step(const RcaeState& state,
                                              const Vec3& omega_meas,
                                              const OrientationMatrix& meas,
                                              const RcaeConfig& cfg) {
  const OrientationMatrix rel = relative_orientation(state.estimate, meas);
  const double z = rel.matrix().trace() - 3.0;

  RcaeState next = state;
  next.gamma = std::clamp(state.gamma + z, -cfg.gamma_limit, cfg.gamma_limit);

  Eigen::VectorXd phi(3);
  phi << z, next.gamma, z - state.z_prev;

  // Adapt first, then act with the fresh gains; the history records the
  // input that was actually applied.
  const RlsState adapted = rls_update(state.rls, z, phi, cfg.rls);
  const double u = compute_u(phi, adapted.theta);
  next.rls = rls_push(adapted, phi, u);

  const Vec3 eta = correction_signal(u, rel);
  next.estimate = exp_so3(-(omega_meas * cfg.dt + eta)) * state.estimate;

  next.z_prev = z;
  next.u_prev = u;
  next.step = state.step + 1;
  if (next.step % kReprojectEvery == 0) {
    next.estimate = project_to_so3(next.estimate.matrix());
  }

  RcaeTelemetry tel;
  tel.z = z;
  tel.u = u;
  tel.gains = adapted.theta;
  tel.eta = eta;
  return {std::move(next), tel};
}

RcaeState rcae_propagate(const RcaeState& state, const Vec3& omega_meas,
                         const RcaeConfig& cfg) {
  RcaeState next = state;
  next.estimate = exp_so3(-omega_meas * cfg.dt) * state.estimate;
  next.step = state.step + 1;
  if (next.step % kReprojectEvery == 0) {
    next.estimate = project_to_so3(next.estimate.matrix());
  }
  return next;
}

OrientationMatrix dead_reckon_step(const OrientationMatrix& o, const Vec3& omega,
                                   double dt) {
  return exp_so3(-omega * dt) * o;
}

}  // namespace rcae
