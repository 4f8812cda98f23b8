#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcae/config.hpp"

// Scenario engine.  Simulation synthesizes an IMU record stream (noisy gyro
// plus body-frame gravity/field direction vectors) and then runs the exact
// same estimator loop that log replay uses, so the two modes agree to within
// file round-off by construction.
//
// Row semantics: row k logs the state each estimator holds at t_k, before it
// sees the measurement of row k; z is always the estimate-vs-measurement
// error.  The orientation measurement is reconstructed from (accel, mag) per
// row.  Rows whose vectors are unusable (non-finite or geometrically
// degenerate) hold the previous measurement for reporting and step the
// estimators by propagation only.

namespace rcae {

struct ImuRecord {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // any positive scale, direction is what counts
  Vec3 mag = Vec3::Zero();
  std::optional<UnitQuaternion> truth;  // ground-truth attitude if known
};

struct EstimatorTrace {
  std::string name;
  std::vector<Euler321> euler;  // estimate at t_k
  std::vector<double> z;        // NaN before the first valid measurement
  // Populated for the adaptive estimator only:
  std::vector<double> u;
  std::vector<Eigen::Vector3d> gains;
  std::vector<Vec3> eta;
  // Bias estimate trajectory, populated for the Kalman estimator only.
  std::vector<Vec3> bias;
  bool frozen = false;             // a numerical failure stopped this estimator
  std::vector<std::string> notes;  // diagnostics (freeze reason, ...)
};

struct RunSummary {
  struct PerEstimator {
    std::string name;
    double mean_abs_z = 0.0;                  // final quarter of the run
    Vec3 rms_euler_error = Vec3::Zero();      // final quarter, radians; NaN without truth
  };
  std::vector<PerEstimator> estimators;
  double wall_seconds = 0.0;  // estimator loop only, excludes file handling
};

struct RunResult {
  std::vector<double> t;
  std::vector<std::optional<Euler321>> truth;
  std::vector<std::optional<Euler321>> meas;
  std::vector<EstimatorTrace> traces;
  RunSummary summary;
  std::vector<std::string> warnings;  // timestamp gaps and similar oddities

  bool all_frozen() const;
};

// The record stream a simulation run consumes (and what it exports).
std::vector<ImuRecord> synthesize_log(const HarnessConfig& cfg);

// Steps every configured estimator over the records.  Throws MalformedRecord
// on non-monotonic timestamps.  Per-record dt comes from the timestamps.
RunResult replay_records(std::span<const ImuRecord> records, const HarnessConfig& cfg);

// synthesize_log + replay_records.
RunResult run_scenario(const HarnessConfig& cfg);

// Per-angle absolute difference, wrapped into [0, pi].
Vec3 euler_errors(const Euler321& a, const Euler321& b);

// --- file formats (CSV, LF line endings, %.17g doubles, angles in degrees,
// gyro in deg/s; in-memory values are radians) ---

// Header t,gx,gy,gz,ax,ay,az,mx,my,mz plus optional qw,qx,qy,qz truth columns.
std::vector<ImuRecord> read_imu_log(std::istream& in);  // throws MalformedRecord
void write_imu_log(std::span<const ImuRecord> records, std::ostream& out);

// Result table: t, truth and measured Euler angles, then per estimator its
// Euler angles and z (clamped into [-4, 0]), plus u/gain/eta columns for the
// adaptive estimator.  Column order follows cfg.estimators.
void write_run_csv(const RunResult& result, std::ostream& out);

// Same, restricted to one estimator's columns.
void write_run_csv(const RunResult& result, std::ostream& out,
                   const std::string& estimator);

// Human-readable per-estimator summary table.
void write_summary(const RunResult& result, std::ostream& out);

}  // namespace rcae
