// Release gate: every shipping requirement checked at full scale, one
// verdict line per requirement with the measured value and its bound.
// Exits nonzero if any gate fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcae/rls.hpp"
#include "rcae/run.hpp"

using namespace rcae;

namespace {

struct Gate {
  int failures = 0;

  void verdict(int id, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    if (!pass) ++failures;
  }

  void note(const std::string& text) { std::printf("         %s\n", text.c_str()); }
};

struct Draw {
  std::mt19937_64 engine;
  explicit Draw(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  Vec3 unit() {
    for (;;) {
      Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
      const double n = v.norm();
      if (n > 1e-3) return v / n;
    }
  }

  Eigen::VectorXd vec(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Rotation exponential and its inverse at scale
// ---------------------------------------------------------------------------

void criterion_1(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  Draw draw(101);
  double worst_ortho = 0.0, worst_det = 0.0, worst_round = 0.0;

  for (int i = 0; i < 100000; ++i) {
    const double angle = draw.uniform(1e-6, kPi - 1e-3);
    const Vec3 v = angle * draw.unit();
    const OrientationMatrix o = exp_so3(v);

    const Mat3 m = o.matrix();
    worst_ortho = std::max(worst_ortho,
                           (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(m.determinant() - 1.0));

    const AxisAngle aa = axis_angle(o);
    worst_round = std::max(worst_round, (aa.angle * aa.axis - v).norm());
  }
  const double elapsed = seconds_since(t0);

  const bool pass = worst_ortho <= 1e-12 && worst_det <= 1e-12 &&
                    worst_round <= 1e-9 && elapsed < 5.0;
  gate.verdict(1, pass,
               fmt("rotation exp/log, 1e5 samples: orthonormality %.3g (bound 1e-12), "
                   "det %.3g (bound 1e-12), axis-angle round trip %.3g (bound 1e-9), "
                   "%.2f s (bound 5 s)",
                   worst_ortho, worst_det, worst_round, elapsed));
}

// ---------------------------------------------------------------------------
// 2. Recursive least squares vs direct batch minimization
// ---------------------------------------------------------------------------

// Direct solve of the weighted regularized cost after samples 0..k, built
// from the raw sequences with explicit convolution filtering.
struct BatchOracle {
  RlsConfig cfg;
  std::vector<Eigen::VectorXd> phis;
  std::vector<double> zs;
  std::vector<double> us;

  Eigen::VectorXd filtered_phi(std::size_t i) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(cfg.l_theta);
    for (int c = 1; c <= cfg.filter.order(); ++c) {
      if (i < static_cast<std::size_t>(c)) break;
      f += cfg.filter.coefficients[c - 1] * phis[i - c];
    }
    return f;
  }

  double filtered_u(std::size_t i) const {
    double f = 0.0;
    for (int c = 1; c <= cfg.filter.order(); ++c) {
      if (i < static_cast<std::size_t>(c)) break;
      f += cfg.filter.coefficients[c - 1] * us[i - c];
    }
    return f;
  }

  Eigen::VectorXd solve(std::size_t k) const {
    const int n = cfg.l_theta;
    const Eigen::VectorXd theta0 =
        cfg.theta0.size() ? cfg.theta0 : Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd a = std::pow(cfg.lambda, static_cast<double>(k + 1)) /
                        cfg.p0_scale * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = a * theta0;
    for (std::size_t i = 0; i <= k; ++i) {
      const double w = std::pow(cfg.lambda, static_cast<double>(k - i));
      const Eigen::VectorXd pf = filtered_phi(i);
      a += w * (cfg.rz * pf * pf.transpose() + cfg.ru * phis[i] * phis[i].transpose());
      b += w * cfg.rz * pf * (filtered_u(i) - zs[i]);
    }
    return a.ldlt().solve(b);
  }
};

void criterion_2(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();

  struct Variant {
    double lambda, ru, p0;
    std::vector<double> fir;
  };
  const Variant variants[] = {
      {1.0, 0.0, 0.1, {1.0}},
      {0.99, 1.0, 0.5, {1.0}},
      {0.97, 0.0, 5.0, {1.0, -0.5, 0.25}},
      {0.95, 2.0, 1.0, {0.8, 0.3}},
  };

  Draw draw(202);
  double worst_rel = 0.0;
  double worst_spd = 1.0;  // smallest eigenvalue seen

  for (int seq = 0; seq < 20; ++seq) {
    const Variant& v = variants[seq % 4];
    RlsConfig cfg;
    cfg.l_theta = 3;
    cfg.p0_scale = v.p0;
    cfg.rz = 1.0;
    cfg.ru = v.ru;
    cfg.lambda = v.lambda;
    cfg.filter.coefficients = v.fir;

    BatchOracle oracle{cfg, {}, {}, {}};
    RlsState state = RlsState::initial(cfg);

    for (std::size_t k = 0; k < 500; ++k) {
      const double z = draw.uniform(-1.0, 1.0);
      const Eigen::VectorXd phi = draw.vec(3, -2.0, 2.0);

      state = rls_update(state, z, phi, cfg);
      const double u = compute_u(phi, state.theta);
      state = rls_push(state, phi, u);

      oracle.phis.push_back(phi);
      oracle.zs.push_back(z);
      oracle.us.push_back(u);

      const Eigen::VectorXd batch = oracle.solve(k);
      worst_rel = std::max(worst_rel, (state.theta - batch).norm() /
                                          std::max(1.0, batch.norm()));

      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(state.p);
      worst_spd = std::min(worst_spd, es.eigenvalues().minCoeff());
    }
  }
  const double elapsed = seconds_since(t0);

  const bool pass = worst_rel <= 1e-7 && worst_spd > 0.0 && elapsed < 10.0;
  gate.verdict(2, pass,
               fmt("recursive vs batch least squares, 20 x 500 steps: worst relative "
                   "gap %.3g (bound 1e-7), covariance min eigenvalue %.3g (bound > 0), "
                   "%.2f s (bound 10 s)",
                   worst_rel, worst_spd, elapsed));
}

// ---------------------------------------------------------------------------
// 3. Orientation recovery from direction measurements
// ---------------------------------------------------------------------------

void criterion_3(Gate& gate) {
  Draw draw(303);
  const Vec3 ref_g(0.0, 0.0, 1.0);
  const Vec3 ref_m(std::cos(deg2rad(60.0)), 0.0, std::sin(deg2rad(60.0)));

  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const OrientationMatrix truth = exp_so3(draw.uniform(0.0, kPi - 1e-3) * draw.unit());
    const OrientationMatrix rec =
        orientation_from_accel_mag(truth * ref_g, truth * ref_m);
    worst = std::max(worst, (rec.matrix() - truth.matrix()).cwiseAbs().maxCoeff());
  }

  gate.verdict(3, worst <= 1e-9,
               fmt("orientation recovery from gravity + field directions, 1e4 "
                   "orientations: worst error %.3g (bound 1e-9)",
                   worst));
}

// ---------------------------------------------------------------------------
// 4. Noise-free convergence of the adaptive estimator
// ---------------------------------------------------------------------------

void criterion_4(Gate& gate) {
  HarnessConfig cfg;  // reference tumble, but with all disturbances off
  cfg.gyro_bias = Vec3::Zero();
  cfg.gyro_sigma = 0.0;
  cfg.euler_sigma = 0.0;
  cfg.estimators = {"rcae"};

  const RunResult result = run_scenario(cfg);
  const double measured = result.summary.estimators[0].mean_abs_z;

  // Regression anchor from the first verified run of this scenario.
  const double golden = 1.3695550653898713e-05;
  const double drift = std::abs(measured / golden - 1.0);

  const bool pass = measured < 0.01 && drift <= 1e-9;
  gate.verdict(4, pass,
               fmt("noise-free tracking, final-quarter mean |z| = %.17g "
                   "(bound 0.01; regression anchor %.17g, drift %.3g, window 1e-9)",
                   measured, golden, drift));
}

// ---------------------------------------------------------------------------
// 5. Noisy scenario: adaptive estimator vs open-loop propagation
// ---------------------------------------------------------------------------

void criterion_5(Gate& gate, const RunResult& noisy) {
  const auto* rcae = &noisy.summary.estimators[0];
  const auto* dr = &noisy.summary.estimators[2];

  const Vec3 rms_deg = rad2deg(1.0) * rcae->rms_euler_error;
  const bool beats_dr = rcae->mean_abs_z < dr->mean_abs_z;
  const bool under_meas = rms_deg.maxCoeff() < 5.0;

  gate.verdict(5, beats_dr && under_meas,
               fmt("noisy scenario: adaptive mean |z| %.4g < open-loop %.4g; "
                   "final-quarter rms angle errors [%.3g %.3g %.3g] deg "
                   "(bound: each < 5 deg measurement noise)",
                   rcae->mean_abs_z, dr->mean_abs_z, rms_deg.x(), rms_deg.y(),
                   rms_deg.z()));
}

// ---------------------------------------------------------------------------
// 6. Kalman baseline health on the noisy scenario
// ---------------------------------------------------------------------------

void criterion_6(Gate& gate, const HarnessConfig& cfg, const RunResult& noisy) {
  // Quaternion norm: replicate the production stepping order over the same
  // record stream and watch the norm after every operation.
  const std::vector<ImuRecord> records = synthesize_log(cfg);
  MekfConfig mc = cfg.mekf_config();
  MekfState s = MekfState::initial(mc);
  double worst_norm = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const OrientationMatrix meas =
        orientation_from_accel_mag(records[k].accel, records[k].mag);
    s = mekf_update(s, meas * mc.ref_gravity, meas * mc.ref_mag, mc);
    worst_norm = std::max(worst_norm, std::abs(s.q.norm() - 1.0));
    s = mekf_predict(s, records[k].gyro, mc);
    worst_norm = std::max(worst_norm, std::abs(s.q.norm() - 1.0));
  }

  // Bias accuracy: final-quarter mean estimate per axis against the injected
  // offset.  (The worst single-sample excursion is reported for context; the
  // estimate still oscillates at this tuning.)
  const EstimatorTrace& mekf = noisy.traces[1];
  const std::size_t n = mekf.bias.size();
  const std::size_t start = (3 * n) / 4;
  Vec3 mean_bias = Vec3::Zero();
  Vec3 worst_excursion = Vec3::Zero();
  for (std::size_t k = start; k < n; ++k) {
    mean_bias += mekf.bias[k];
    const Vec3 e = (mekf.bias[k] - cfg.gyro_bias).cwiseAbs();
    worst_excursion = worst_excursion.cwiseMax(e);
  }
  mean_bias /= static_cast<double>(n - start);
  const Vec3 mean_err_deg = rad2deg(1.0) * (mean_bias - cfg.gyro_bias);

  // Alignment scores stay inside the geometric range for both filters.
  double z_lo = 0.0, z_hi = -4.0;
  for (const auto* tr : {&noisy.traces[0], &noisy.traces[1]}) {
    for (const double z : tr->z) {
      if (std::isnan(z)) continue;
      z_lo = std::min(z_lo, z);
      z_hi = std::max(z_hi, z);
    }
  }

  const bool norm_ok = worst_norm <= 1e-9;
  const bool bias_ok = mean_err_deg.cwiseAbs().maxCoeff() < 0.5;
  const bool z_ok = z_lo >= -4.0 - 1e-12 && z_hi <= 1e-12;

  gate.verdict(6, norm_ok && bias_ok && z_ok,
               fmt("Kalman baseline: quaternion norm drift %.3g (bound 1e-9); "
                   "final-quarter mean bias error [%.3g %.3g %.3g] deg/s "
                   "(bound 0.5 per axis); z range [%.3g, %.3g] (bound [-4, 0])",
                   worst_norm, mean_err_deg.x(), mean_err_deg.y(), mean_err_deg.z(),
                   z_lo, z_hi));
  gate.note(fmt("bias worst single-sample excursion [%.3g %.3g %.3g] deg/s "
                "over the final quarter (context only, not gated)",
                rad2deg(worst_excursion.x()), rad2deg(worst_excursion.y()),
                rad2deg(worst_excursion.z())));
}

// ---------------------------------------------------------------------------
// 7. Determinism and export/replay parity
// ---------------------------------------------------------------------------

void criterion_7(Gate& gate, const HarnessConfig& cfg, const RunResult& noisy) {
  // Byte-level determinism of both output formats.
  const RunResult again = run_scenario(cfg);
  std::ostringstream csv_a, csv_b;
  write_run_csv(noisy, csv_a);
  write_run_csv(again, csv_b);
  const bool csv_same = csv_a.str() == csv_b.str();

  const std::vector<ImuRecord> records = synthesize_log(cfg);
  std::ostringstream log_a, log_b;
  write_imu_log(records, log_a);
  write_imu_log(synthesize_log(cfg), log_b);
  const bool log_same = log_a.str() == log_b.str();

  // Export, read back, replay: estimator outputs must agree to round-off.
  std::istringstream log_in(log_a.str());
  const RunResult replayed = replay_records(read_imu_log(log_in), cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < noisy.traces.size(); ++i) {
    const auto& ta = noisy.traces[i];
    const auto& tb = replayed.traces[i];
    for (std::size_t k = 0; k < ta.euler.size(); ++k) {
      worst = std::max(worst, euler_errors(ta.euler[k], tb.euler[k]).maxCoeff());
      if (!std::isnan(ta.z[k]) || !std::isnan(tb.z[k])) {
        worst = std::max(worst, std::abs(ta.z[k] - tb.z[k]));
      }
    }
  }

  const bool pass = csv_same && log_same && worst <= 1e-12;
  gate.verdict(7, pass,
               fmt("repeatability: result tables byte-identical %s, exported logs "
                   "byte-identical %s; export->replay round trip worst deviation "
                   "%.3g (bound 1e-12)",
                   csv_same ? "yes" : "NO", log_same ? "yes" : "NO", worst));
}

// ---------------------------------------------------------------------------
// 8. End-to-end comparison speed through the installed binary
// ---------------------------------------------------------------------------

void criterion_8(Gate& gate) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("rcae_acceptance_" + std::to_string(::getpid()));
  const std::string cmd = std::string(RCAE_CLI_PATH) + " compare --out-dir " +
                          dir.string() + " > /dev/null 2>&1";

  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  const double elapsed = seconds_since(t0);

  const bool ran = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  const bool produced = fs::exists(dir / "summary.txt") && fs::exists(dir / "rcae.csv") &&
                        fs::exists(dir / "mekf.csv") && fs::exists(dir / "dead_reckon.csv");
  const bool pass = ran && produced && elapsed < 1.0;
  gate.verdict(8, pass,
               fmt("full three-estimator comparison via the command line "
                   "(2000 steps): exit %s, outputs %s, %.3f s (bound 1 s)",
                   ran ? "0" : "nonzero", produced ? "complete" : "MISSING", elapsed));
}

}  // namespace

int main() {
  Gate gate;

  criterion_1(gate);
  criterion_2(gate);
  criterion_3(gate);
  criterion_4(gate);

  // One shared run of the reference noisy scenario feeds gates 5-7.
  const HarnessConfig noisy_cfg;  // defaults are the reference scenario
  const RunResult noisy = run_scenario(noisy_cfg);
  criterion_5(gate, noisy);
  criterion_6(gate, noisy_cfg, noisy);
  criterion_7(gate, noisy_cfg, noisy);

  criterion_8(gate);

  if (gate.failures == 0) {
    std::printf("all 8 gates passed\n");
  } else {
    std::printf("%d gate(s) FAILED\n", gate.failures);
  }
  return gate.failures == 0 ? 0 : 1;
}
