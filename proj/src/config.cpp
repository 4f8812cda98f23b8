#include "rcae/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>

namespace rcae {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError("config: bad number for '" + key + "': '" + v + "'");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError("config: bad integer for '" + key + "': '" + v + "'");
  }
  return static_cast<std::uint64_t>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto end = comma == std::string::npos ? v.size() : comma;
    parts.push_back(trim(v.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& v,
                                  int expected = -1) {
  std::vector<double> out;
  for (const auto& p : split_list(v)) out.push_back(parse_double(key, p));
  if (expected >= 0 && static_cast<int>(out.size()) != expected) {
    throw ConfigError("config: '" + key + "' expects " + std::to_string(expected) +
                      " comma-separated values");
  }
  return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& v) {
  const auto n = parse_numbers(key, v, 3);
  return Vec3(n[0], n[1], n[2]);
}

}  // namespace

NoiseModel HarnessConfig::noise_model() const {
  NoiseModel n;
  n.gyro_bias = gyro_bias;
  n.gyro_sigma = gyro_sigma;
  n.euler_sigma = euler_sigma;
  n.seed = seed;
  return n;
}

RcaeConfig HarnessConfig::rcae_config() const {
  RcaeConfig c;
  c.dt = dt;
  c.gamma_limit = rcae_gamma_limit;
  c.rls.l_theta = 3;
  c.rls.p0_scale = rcae_p0;
  c.rls.theta0 = Eigen::Vector3d(rcae_theta0);
  c.rls.rz = rcae_rz;
  c.rls.ru = rcae_ru;
  c.rls.lambda = rcae_lambda;
  c.rls.filter.coefficients = rcae_fir;
  return c;
}

MekfConfig HarnessConfig::mekf_config() const {
  MekfConfig c;
  c.dt = dt;
  c.p0_attitude = mekf_p0;
  c.p0_bias = mekf_p0;
  c.q_attitude = mekf_q_attitude;
  c.q_bias = mekf_q_bias;
  c.r_gravity = mekf_r_gravity;
  c.r_mag = mekf_r_mag;
  c.mag_field_magnitude = mekf_mag_field;
  c.ref_gravity = ref_gravity();
  c.ref_mag = ref_mag();
  return c;
}

Vec3 HarnessConfig::ref_mag() const {
  const double dip = deg2rad(mekf_dip_deg);
  return Vec3(std::cos(dip), 0.0, std::sin(dip));
}

void HarnessConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("config: duration must be > 0");
  if (!(dt > 0.0)) throw ConfigError("config: dt must be > 0");
  if (duration / dt > 5e7) throw ConfigError("config: duration/dt is unreasonably large");
  if (estimators.empty()) throw ConfigError("config: estimators must not be empty");

  const std::set<std::string> known = {"rcae", "mekf", "dead_reckon"};
  std::set<std::string> seen;
  for (const auto& e : estimators) {
    if (!known.count(e)) throw ConfigError("config: unknown estimator '" + e + "'");
    if (!seen.insert(e).second) throw ConfigError("config: duplicate estimator '" + e + "'");
  }

  if (!(gyro_sigma >= 0.0) || !(euler_sigma >= 0.0)) {
    throw ConfigError("config: noise sigmas must be >= 0");
  }
  rcae_config().validate();
  mekf_config().validate();
}

void apply_config_entry(HarnessConfig& cfg, const std::string& rawkey,
                        const std::string& value) {
  const std::string key = trim(rawkey);
  if (key == "duration") {
    cfg.duration = parse_double(key, value);
  } else if (key == "dt") {
    cfg.dt = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "estimators") {
    cfg.estimators = split_list(value);
  } else if (key == "initial_euler_deg") {
    const Vec3 v = parse_vec3(key, value);
    cfg.initial_euler = Euler321{deg2rad(v.x()), deg2rad(v.y()), deg2rad(v.z())};
  } else if (key == "omega_amplitude_deg") {
    cfg.omega_amplitude = deg2rad(1.0) * parse_vec3(key, value);
  } else if (key == "omega_frequency") {
    cfg.omega_frequency = parse_vec3(key, value);
  } else if (key == "noise.gyro_bias_deg") {
    cfg.gyro_bias = deg2rad(1.0) * parse_vec3(key, value);
  } else if (key == "noise.gyro_sigma_deg") {
    cfg.gyro_sigma = deg2rad(parse_double(key, value));
  } else if (key == "noise.euler_sigma_deg") {
    cfg.euler_sigma = deg2rad(parse_double(key, value));
  } else if (key == "rcae.p0_scale") {
    cfg.rcae_p0 = parse_double(key, value);
  } else if (key == "rcae.lambda") {
    cfg.rcae_lambda = parse_double(key, value);
  } else if (key == "rcae.rz") {
    cfg.rcae_rz = parse_double(key, value);
  } else if (key == "rcae.ru") {
    cfg.rcae_ru = parse_double(key, value);
  } else if (key == "rcae.fir") {
    cfg.rcae_fir = parse_numbers(key, value);
  } else if (key == "rcae.theta0") {
    cfg.rcae_theta0 = parse_vec3(key, value);
  } else if (key == "rcae.gamma_limit") {
    cfg.rcae_gamma_limit = parse_double(key, value);
  } else if (key == "mekf.p0") {
    cfg.mekf_p0 = parse_double(key, value);
  } else if (key == "mekf.q_attitude") {
    cfg.mekf_q_attitude = parse_double(key, value);
  } else if (key == "mekf.q_bias") {
    cfg.mekf_q_bias = parse_double(key, value);
  } else if (key == "mekf.r_gravity") {
    cfg.mekf_r_gravity = parse_double(key, value);
  } else if (key == "mekf.r_mag") {
    cfg.mekf_r_mag = parse_double(key, value);
  } else if (key == "mekf.mag_field") {
    cfg.mekf_mag_field = parse_double(key, value);
  } else if (key == "mekf.dip_deg") {
    cfg.mekf_dip_deg = parse_double(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

HarnessConfig parse_config(std::istream& in) {
  HarnessConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value': '" + line + "'");
    }
    apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace rcae
