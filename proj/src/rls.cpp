#include "rcae/rls.hpp"

#include <cmath>

namespace rcae {

void RlsConfig::validate() const {
  if (l_theta < 1) throw ConfigError("rls: l_theta must be >= 1");
  if (!(p0_scale > 0.0)) throw ConfigError("rls: p0_scale must be > 0");
  if (!(rz > 0.0)) throw ConfigError("rls: rz must be > 0");
  if (!(ru >= 0.0)) throw ConfigError("rls: ru must be >= 0");
  if (!(lambda > 0.0) || lambda > 1.0) throw ConfigError("rls: lambda must be in (0, 1]");
  if (filter.order() < 1) throw ConfigError("rls: filter needs at least one coefficient");
  if (theta0.size() != 0 && theta0.size() != l_theta) {
    throw ConfigError("rls: theta0 dimension mismatch");
  }
}

RlsState RlsState::initial(const RlsConfig& cfg) {
  cfg.validate();
  RlsState s;
  s.theta = cfg.theta0.size() ? cfg.theta0 : Eigen::VectorXd::Zero(cfg.l_theta);
  s.p = cfg.p0_scale * Eigen::MatrixXd::Identity(cfg.l_theta, cfg.l_theta);
  s.phi_history.assign(cfg.filter.order(), Eigen::VectorXd::Zero(cfg.l_theta));
  s.u_history.assign(cfg.filter.order(), 0.0);
  return s;
}

std::pair<Eigen::VectorXd, double> filtered_signals(const RlsState& state,
                                                    const FirFilter& filter) {
  Eigen::VectorXd phi_f = Eigen::VectorXd::Zero(state.theta.size());
  double u_f = 0.0;
  for (int i = 0; i < filter.order(); ++i) {
    phi_f += filter.coefficients[i] * state.phi_history[i];
    u_f += filter.coefficients[i] * state.u_history[i];
  }
  return {phi_f, u_f};
}

RlsState rls_update(const RlsState& state, double z, const Eigen::VectorXd& phi,
                    const RlsConfig& cfg) {
  cfg.validate();
  if (phi.size() != state.theta.size()) {
    throw ConfigError("rls: regressor dimension mismatch");
  }

  const auto [phi_f, u_f] = filtered_signals(state, cfg.filter);

  // Stack the filtered and raw regressors; weights rbar = diag(rz, ru).
  Eigen::Matrix<double, 2, Eigen::Dynamic> phibar(2, phi.size());
  phibar.row(0) = phi_f.transpose();
  phibar.row(1) = phi.transpose();
  const Eigen::Vector2d rbar(cfg.rz, cfg.ru);

  const Eigen::Matrix2d m = phibar * state.p * phibar.transpose();
  // Covariance update in a form that never inverts rbar, so ru == 0 is fine:
  //   P+ = (P - P Phibar^T T^{-1} Rbar Phibar P) / lambda,
  //   T  = lambda I + Rbar M.
  const Eigen::Matrix2d t =
      cfg.lambda * Eigen::Matrix2d::Identity() + rbar.asDiagonal() * m;

  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(t);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(1);
  if (!(smin > 0.0) || smax > 1e12 * smin) {
    throw SingularInnovation("rls: innovation block condition number too large");
  }

  RlsState next = state;
  const Eigen::MatrixXd pphit = state.p * phibar.transpose();
  next.p = (state.p - pphit * t.inverse() * rbar.asDiagonal() * pphit.transpose()) /
           cfg.lambda;
  next.p = ((next.p + next.p.transpose()) / 2.0).eval();

  const double zhat = z + phi_f.dot(state.theta) - u_f;
  next.theta = state.theta - next.p * phi_f * (cfg.rz * zhat) -
               next.p * phi * (cfg.ru * phi.dot(state.theta));
  return next;
}

RlsState rls_push(RlsState state, const Eigen::VectorXd& phi, double u) {
  state.phi_history.push_front(phi);
  state.phi_history.pop_back();
  state.u_history.push_front(u);
  state.u_history.pop_back();
  return state;
}

RlsState rls_step(const RlsState& state, double z, const Eigen::VectorXd& phi,
                  double u, const RlsConfig& cfg) {
  return rls_push(rls_update(state, z, phi, cfg), phi, u);
}

double batch_cost(const Eigen::VectorXd& theta, std::span<const double> zs,
                  std::span<const Eigen::VectorXd> phis,
                  std::span<const double> us, const RlsConfig& cfg) {
  cfg.validate();
  const auto n = zs.size();
  if (phis.size() != n || us.size() != n) {
    throw ConfigError("rls: batch_cost sequence length mismatch");
  }

  const Eigen::VectorXd theta0 =
      cfg.theta0.size() ? cfg.theta0 : Eigen::VectorXd::Zero(cfg.l_theta);

  double j = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd phi_f = Eigen::VectorXd::Zero(cfg.l_theta);
    double u_f = 0.0;
    for (int c = 1; c <= cfg.filter.order(); ++c) {
      if (i < static_cast<std::size_t>(c)) break;
      phi_f += cfg.filter.coefficients[c - 1] * phis[i - c];
      u_f += cfg.filter.coefficients[c - 1] * us[i - c];
    }
    const double zhat = zs[i] + phi_f.dot(theta) - u_f;
    const double uhat = phis[i].dot(theta);
    j += std::pow(cfg.lambda, static_cast<double>(n - 1 - i)) *
         (cfg.rz * zhat * zhat + cfg.ru * uhat * uhat);
  }
  const Eigen::VectorXd d = theta - theta0;
  j += d.squaredNorm() / cfg.p0_scale;
  return j;
}

}  // namespace rcae
