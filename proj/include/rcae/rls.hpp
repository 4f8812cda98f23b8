#pragma once

#include <deque>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rcae/errors.hpp"

// Recursive least squares with a retrospective (filtered) regressor.
//
// Each step sees a scalar performance signal z_k, a regressor row phi_k and
// the input u_k that was actually applied.  The filtered quantities
//   phi_f,k = sum_i N_i * phi_{k-i},   u_f,k = sum_i N_i * u_{k-i},  i = 1..n_f
// use only past data (strictly causal filter).  The recursion returns, at
// every step, the exact minimizer of
//   J_k(theta) = sum_{i<=k} lambda^{k-i} [ rz * (z_i + phi_f,i theta - u_f,i)^2
//                                          + ru * (phi_i theta)^2 ]
//                + (theta - theta0)^T P0^{-1} (theta - theta0)
// (regularizer weighted by lambda^{k+1} when lambda < 1).

namespace rcae {

struct FirFilter {
  // coefficients[i-1] multiplies the sample from i steps ago.
  std::vector<double> coefficients{1.0};

  int order() const { return static_cast<int>(coefficients.size()); }
};

struct RlsConfig {
  int l_theta = 3;            // parameter dimension
  double p0_scale = 0.1;      // P(0) = p0_scale * I
  Eigen::VectorXd theta0;     // empty means zero
  double rz = 1.0;            // performance weight, > 0
  double ru = 0.0;            // input penalty weight, >= 0
  double lambda = 1.0;        // forgetting factor, (0, 1]
  FirFilter filter;

  void validate() const;
};

struct RlsState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd p;
  // Most recent first: [0] is the sample from one step ago.  Fixed length
  // filter.order(), zero-initialized.
  std::deque<Eigen::VectorXd> phi_history;
  std::deque<double> u_history;

  static RlsState initial(const RlsConfig& cfg);
};

// (phi_f, u_f) for the coming step, from history alone.
std::pair<Eigen::VectorXd, double> filtered_signals(const RlsState& state,
                                                    const FirFilter& filter);

// Parameter/covariance half of a step: consumes z_k and phi_k, leaves the
// histories untouched.  Throws SingularInnovation when the 2x2 innovation
// block is numerically singular (condition number above 1e12).
RlsState rls_update(const RlsState& state, double z, const Eigen::VectorXd& phi,
                    const RlsConfig& cfg);

// History half of a step: records the (phi_k, u_k) pair that was applied.
RlsState rls_push(RlsState state, const Eigen::VectorXd& phi, double u);

// Full step: rls_update followed by rls_push.
RlsState rls_step(const RlsState& state, double z, const Eigen::VectorXd& phi,
                  double u, const RlsConfig& cfg);

inline double compute_u(const Eigen::VectorXd& phi, const Eigen::VectorXd& theta) {
  return phi.dot(theta);
}

// Cost J_k evaluated directly from the raw sequences (filtering done here by
// convolution), with the regularizer unweighted.  Coincides with the cost the
// recursion minimizes when lambda == 1.
double batch_cost(const Eigen::VectorXd& theta, std::span<const double> zs,
                  std::span<const Eigen::VectorXd> phis,
                  std::span<const double> us, const RlsConfig& cfg);

}  // namespace rcae
