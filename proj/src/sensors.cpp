#include "rcae/sensors.hpp"

#include <cmath>

namespace rcae {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t channel) {
  return mix_seed(seed + channel * 0x9E3779B97F4A7C15ull);
}

double NormalRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // (0,1] for the radius so log never sees zero; [0,1) for the angle.
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vec3 noisy_gyro(const Vec3& omega_true, const NoiseModel& noise, NormalRng& rng) {
  Vec3 n;
  n << rng.gaussian(), rng.gaussian(), rng.gaussian();
  return omega_true + noise.gyro_bias + noise.gyro_sigma * n;
}

OrientationMatrix perturb_euler(const OrientationMatrix& truth, const Euler321& delta) {
  const EulerResult e = matrix_to_euler321(truth);
  if (e.gimbal_lock) {
    throw GimbalLock("perturb_euler: truth orientation at the pitch singularity");
  }
  Euler321 p;
  p.yaw = wrap_pi(e.angles.yaw + delta.yaw);
  p.pitch = wrap_pi(e.angles.pitch + delta.pitch);
  p.roll = wrap_pi(e.angles.roll + delta.roll);
  return euler321_to_matrix(p);
}

OrientationMatrix noisy_orientation(const OrientationMatrix& truth,
                                    const NoiseModel& noise, NormalRng& rng) {
  Euler321 d;
  d.roll = noise.euler_sigma * rng.gaussian();
  d.pitch = noise.euler_sigma * rng.gaussian();
  d.yaw = noise.euler_sigma * rng.gaussian();
  return perturb_euler(truth, d);
}

OrientationMatrix orientation_from_accel_mag(const Vec3& accel, const Vec3& mag) {
  const double na = accel.norm();
  const double nm = mag.norm();
  if (na < 1e-9 || nm < 1e-9) {
    throw Degenerate("orientation reconstruction: near-zero measurement");
  }
  const Vec3 k = accel / na;
  const Vec3 c = k.cross(Vec3(mag / nm));
  if (c.norm() < 1e-6) {
    throw Degenerate("orientation reconstruction: gravity and field near parallel");
  }
  const Vec3 j = c / c.norm();
  const Vec3 i = j.cross(k);
  Mat3 o;
  o.col(0) = i;
  o.col(1) = j;
  o.col(2) = k;
  return OrientationMatrix(o);
}

}  // namespace rcae
