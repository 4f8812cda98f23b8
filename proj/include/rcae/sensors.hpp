#pragma once

#include "rcae/rng.hpp"
#include "rcae/so3.hpp"

// Measurement synthesis and the inverse problem of reconstructing an
// orientation from body-frame gravity and magnetic direction measurements.

namespace rcae {

struct NoiseModel {
  Vec3 gyro_bias = Vec3::Zero();  // rad/s, constant offset
  double gyro_sigma = 0.0;        // rad/s, white, per axis
  double euler_sigma = 0.0;       // rad, white, per Euler angle
  std::uint64_t seed = 1;
};

// RNG channel assignment for a run; see derive_stream_seed.
enum class RngChannel : std::uint64_t { gyro = 1, euler = 2 };

inline NormalRng make_channel_rng(std::uint64_t seed, RngChannel ch) {
  return NormalRng(derive_stream_seed(seed, static_cast<std::uint64_t>(ch)));
}

// w_meas = w + bias + sigma * n, n drawn per axis (x, y, z).
Vec3 noisy_gyro(const Vec3& omega_true, const NoiseModel& noise, NormalRng& rng);

// Deterministic core of the orientation noise: adds the given offsets to the
// 3-2-1 Euler angles of truth, wraps into canonical ranges, reassembles.
// Throws GimbalLock when truth sits at the pitch singularity.
OrientationMatrix perturb_euler(const OrientationMatrix& truth, const Euler321& delta);

// Draws the three offsets (roll, pitch, yaw order) as euler_sigma * n.
OrientationMatrix noisy_orientation(const OrientationMatrix& truth,
                                    const NoiseModel& noise, NormalRng& rng);

// Recovers the body orientation from a measured specific-force direction a
// (gravity-aligned, any positive scale) and magnetic direction m (any
// positive scale):
//   k = a/|a|,  j = (k x m)/|k x m|,  i = j x k,  O = [i j k] by columns.
// Scale invariant; needs no knowledge of the magnetic dip.  Throws Degenerate
// when |a| < 1e-9, |m| < 1e-9, or a and m are within 1e-6 of parallel.
OrientationMatrix orientation_from_accel_mag(const Vec3& accel, const Vec3& mag);

}  // namespace rcae
