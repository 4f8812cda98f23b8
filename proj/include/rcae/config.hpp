#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcae/estimator.hpp"
#include "rcae/mekf.hpp"
#include "rcae/sensors.hpp"

// Run configuration.  Defaults reproduce the reference tumble scenario:
// w(t) = (80 cos 5t, 60 cos 7t, 40 cos 9t) deg/s, initial attitude
// yaw 30 / pitch 20 / roll 10 deg, gyro bias (5, 7, 4) deg/s, gyro noise
// 2 deg/s, orientation measurement noise 5 deg per Euler angle, 20 s at
// 100 Hz.  Angles are degrees in config files and radians in memory.

namespace rcae {

struct HarnessConfig {
  double duration = 20.0;  // seconds
  double dt = 0.01;        // seconds
  std::uint64_t seed = 1;

  std::vector<std::string> estimators = {"rcae", "mekf", "dead_reckon"};

  Euler321 initial_euler{deg2rad(30.0), deg2rad(20.0), deg2rad(10.0)};
  Vec3 omega_amplitude{deg2rad(80.0), deg2rad(60.0), deg2rad(40.0)};  // rad/s
  Vec3 omega_frequency{5.0, 7.0, 9.0};                                // rad/s

  Vec3 gyro_bias{deg2rad(5.0), deg2rad(7.0), deg2rad(4.0)};  // rad/s
  double gyro_sigma = deg2rad(2.0);                          // rad/s
  double euler_sigma = deg2rad(5.0);                         // rad

  double rcae_p0 = 0.1;
  double rcae_lambda = 1.0;
  double rcae_rz = 1.0;
  double rcae_ru = 1.0;  // input penalty; keeps the correction angle small
  std::vector<double> rcae_fir = {1.0};
  Vec3 rcae_theta0 = Vec3::Zero();
  double rcae_gamma_limit = 100.0;

  double mekf_p0 = 1e4;
  double mekf_q_attitude = 1.0;
  double mekf_q_bias = 1e-4;
  double mekf_r_gravity = 0.01;  // accelerometer variance, g units
  double mekf_r_mag = 100.0;     // magnetometer variance, raw field units
  double mekf_mag_field = 50.0;  // raw field magnitude r_mag refers to
  double mekf_dip_deg = 60.0;

  NoiseModel noise_model() const;
  RcaeConfig rcae_config() const;
  MekfConfig mekf_config() const;
  Vec3 ref_gravity() const { return Vec3(0.0, 0.0, 1.0); }
  Vec3 ref_mag() const;

  void validate() const;  // throws ConfigError
};

// Flat "key = value" file, '#' comments, dotted key prefixes for grouping.
// Unknown keys are errors.  Keys not present keep their defaults.
HarnessConfig parse_config(std::istream& in);
HarnessConfig load_config(const std::string& path);

// Applies one "key = value" assignment (same keys as the file format).
void apply_config_entry(HarnessConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace rcae
