#include "rcae/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>

namespace rcae {

namespace {

// One estimator being stepped through a record stream.
struct Driver {
  EstimatorTrace trace;

  explicit Driver(std::string name) { trace.name = std::move(name); }
  virtual ~Driver() = default;

  virtual OrientationMatrix estimate() const = 0;
  // meas is null on measurement-hold rows.
  virtual void step(const Vec3& gyro, double dt, const OrientationMatrix* meas) = 0;

  void run_step(std::size_t row, const Vec3& gyro, double dt,
                const OrientationMatrix* meas) {
    if (trace.frozen) {
      log_held_extras();
      return;
    }
    try {
      step(gyro, dt, meas);
    } catch (const Error& e) {
      trace.frozen = true;
      trace.notes.push_back("row " + std::to_string(row) + ": " + e.what());
      log_held_extras();
    }
  }

  // Telemetry filler for rows where no real step happened.
  virtual void log_held_extras() {}
};

struct RcaeDriver final : Driver {
  RcaeConfig cfg;
  RcaeState state;

  RcaeDriver(const HarnessConfig& hc)
      : Driver("rcae"), cfg(hc.rcae_config()), state(RcaeState::initial(cfg)) {}

  OrientationMatrix estimate() const override { return state.estimate; }

  void step(const Vec3& gyro, double dt, const OrientationMatrix* meas) override {
    cfg.dt = dt;
    if (meas) {
      auto [next, tel] = rcae_step(state, gyro, *meas, cfg);
      state = std::move(next);
      trace.u.push_back(tel.u);
      trace.gains.push_back(tel.gains);
      trace.eta.push_back(tel.eta);
    } else {
      state = rcae_propagate(state, gyro, cfg);
      log_held_extras();
    }
  }

  void log_held_extras() override {
    trace.u.push_back(0.0);
    trace.gains.push_back(state.rls.theta);
    trace.eta.push_back(Vec3::Zero());
  }
};

struct MekfDriver final : Driver {
  MekfConfig cfg;
  MekfState state;

  MekfDriver(const HarnessConfig& hc)
      : Driver("mekf"), cfg(hc.mekf_config()), state(MekfState::initial(cfg)) {}

  OrientationMatrix estimate() const override { return state.orientation(); }

  void step(const Vec3& gyro, double dt, const OrientationMatrix* meas) override {
    cfg.dt = dt;
    if (meas) {
      // The update consumes the same direction vectors the reconstruction
      // used; regenerate them from the measured orientation.
      state = mekf_update(state, *meas * cfg.ref_gravity, *meas * cfg.ref_mag, cfg);
    }
    state = mekf_predict(state, gyro, cfg);
  }
};

struct DeadReckonDriver final : Driver {
  OrientationMatrix state;

  DeadReckonDriver(const HarnessConfig&) : Driver("dead_reckon") {}

  OrientationMatrix estimate() const override { return state; }

  void step(const Vec3& gyro, double dt, const OrientationMatrix*) override {
    state = dead_reckon_step(state, gyro, dt);
  }
};

std::unique_ptr<Driver> make_driver(const std::string& name, const HarnessConfig& cfg) {
  if (name == "rcae") return std::make_unique<RcaeDriver>(cfg);
  if (name == "mekf") return std::make_unique<MekfDriver>(cfg);
  if (name == "dead_reckon") return std::make_unique<DeadReckonDriver>(cfg);
  throw ConfigError("unknown estimator '" + name + "'");
}

Vec3 omega_true_at(const HarnessConfig& cfg, double t) {
  return Vec3(cfg.omega_amplitude.x() * std::cos(cfg.omega_frequency.x() * t),
              cfg.omega_amplitude.y() * std::cos(cfg.omega_frequency.y() * t),
              cfg.omega_amplitude.z() * std::cos(cfg.omega_frequency.z() * t));
}

}  // namespace

std::vector<ImuRecord> synthesize_log(const HarnessConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(
      std::max(1.0, std::floor(cfg.duration / cfg.dt + 1e-9)));

  const NoiseModel noise = cfg.noise_model();
  NormalRng gyro_rng = make_channel_rng(noise.seed, RngChannel::gyro);
  NormalRng euler_rng = make_channel_rng(noise.seed, RngChannel::euler);
  const Vec3 ref_g = cfg.ref_gravity();
  const Vec3 ref_m = cfg.ref_mag();

  std::vector<ImuRecord> records;
  records.reserve(n);

  OrientationMatrix truth = euler321_to_matrix(cfg.initial_euler);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const Vec3 omega = omega_true_at(cfg, t);

    ImuRecord rec;
    rec.t = t;
    rec.gyro = noisy_gyro(omega, noise, gyro_rng);
    const OrientationMatrix meas = noisy_orientation(truth, noise, euler_rng);
    rec.accel = meas * ref_g;
    rec.mag = meas * ref_m;
    rec.truth = matrix_to_quat(truth);
    records.push_back(std::move(rec));

    truth = dead_reckon_step(truth, omega, cfg.dt);
  }
  return records;
}

Vec3 euler_errors(const Euler321& a, const Euler321& b) {
  return Vec3(std::abs(wrap_pi(a.yaw - b.yaw)),
              std::abs(wrap_pi(a.pitch - b.pitch)),
              std::abs(wrap_pi(a.roll - b.roll)));
}

bool RunResult::all_frozen() const {
  return std::all_of(traces.begin(), traces.end(),
                     [](const EstimatorTrace& t) { return t.frozen; });
}

RunResult replay_records(std::span<const ImuRecord> records, const HarnessConfig& cfg) {
  cfg.validate();
  if (records.empty()) {
    throw MalformedRecord("replay: no records");
  }

  const std::size_t n = records.size();
  for (std::size_t k = 1; k < n; ++k) {
    if (!(records[k].t > records[k - 1].t)) {
      throw MalformedRecord("replay: non-monotonic timestamp at record " +
                            std::to_string(k));
    }
  }

  RunResult result;

  // Per-record step lengths from the timestamps; the last one repeats.
  std::vector<double> dts(n, cfg.dt);
  for (std::size_t k = 0; k + 1 < n; ++k) dts[k] = records[k + 1].t - records[k].t;
  if (n >= 2) dts[n - 1] = dts[n - 2];

  if (n >= 2) {
    std::vector<double> sorted(dts.begin(), dts.end() - 1);
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (dts[k] > 5.0 * median) {
        result.warnings.push_back("record " + std::to_string(k) + ": timestamp gap of " +
                                  std::to_string(dts[k]) + " s (median dt " +
                                  std::to_string(median) + " s)");
      }
    }
  }

  std::vector<std::unique_ptr<Driver>> drivers;
  for (const auto& name : cfg.estimators) drivers.push_back(make_driver(name, cfg));

  const auto t0 = std::chrono::steady_clock::now();

  std::optional<OrientationMatrix> held_meas;
  for (std::size_t k = 0; k < n; ++k) {
    const ImuRecord& rec = records[k];
    result.t.push_back(rec.t);

    if (rec.truth) {
      result.truth.push_back(matrix_to_euler321(quat_to_matrix(*rec.truth)).angles);
    } else {
      result.truth.push_back(std::nullopt);
    }

    // A usable measurement must be finite and geometrically sound; otherwise
    // the row is stepped by propagation only and reporting holds the last
    // good measurement.
    std::optional<OrientationMatrix> meas;
    if (rec.accel.allFinite() && rec.mag.allFinite() && rec.accel.norm() >= 1e-6 &&
        rec.mag.norm() >= 1e-6) {
      try {
        meas = orientation_from_accel_mag(rec.accel, rec.mag);
      } catch (const Degenerate&) {
      }
    }
    if (meas) held_meas = meas;

    if (held_meas) {
      result.meas.push_back(matrix_to_euler321(*held_meas).angles);
    } else {
      result.meas.push_back(std::nullopt);
    }

    for (auto& d : drivers) {
      const OrientationMatrix est = d->estimate();
      d->trace.euler.push_back(matrix_to_euler321(est).angles);
      d->trace.z.push_back(held_meas ? attitude_error(*held_meas, est)
                                     : std::numeric_limits<double>::quiet_NaN());
      if (auto* m = dynamic_cast<MekfDriver*>(d.get())) {
        d->trace.bias.push_back(m->state.bias);
      }
      d->run_step(k, rec.gyro, dts[k], meas ? &*meas : nullptr);
    }
  }

  const auto t1 = std::chrono::steady_clock::now();

  for (auto& d : drivers) result.traces.push_back(std::move(d->trace));

  // Final-quarter summary.
  const std::size_t start = (3 * n) / 4;
  for (const auto& tr : result.traces) {
    RunSummary::PerEstimator pe;
    pe.name = tr.name;

    double zsum = 0.0;
    std::size_t zcount = 0;
    Vec3 esum = Vec3::Zero();
    std::size_t ecount = 0;
    for (std::size_t k = start; k < n; ++k) {
      if (!std::isnan(tr.z[k])) {
        zsum += std::abs(tr.z[k]);
        ++zcount;
      }
      if (result.truth[k]) {
        const Vec3 e = euler_errors(*result.truth[k], tr.euler[k]);
        esum += e.cwiseProduct(e);
        ++ecount;
      }
    }
    pe.mean_abs_z = zcount ? zsum / static_cast<double>(zcount)
                           : std::numeric_limits<double>::quiet_NaN();
    pe.rms_euler_error =
        ecount ? Vec3((esum / static_cast<double>(ecount)).cwiseSqrt())
               : Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    result.summary.estimators.push_back(std::move(pe));
  }
  result.summary.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

RunResult run_scenario(const HarnessConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ImuRecord> records = synthesize_log(cfg);
  RunResult result = replay_records(records, cfg);
  const auto t1 = std::chrono::steady_clock::now();
  result.summary.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

// ---------------------------------------------------------------- file IO --

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void put_deg(std::ostream& out, double rad) { put(out, rad2deg(rad)); }

double clamp_z(double z) {
  if (std::isnan(z)) return z;
  return std::clamp(z, -4.0, 0.0);
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto comma = line.find(',', start);
    const auto end = comma == std::string::npos ? line.size() : comma;
    fields.push_back(line.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_field(const std::string& s, int lineno, const char* what) {
  char* end = nullptr;
  const char* c = s.c_str();
  const double v = std::strtod(c, &end);
  if (end == c || end != c + s.size()) {
    throw MalformedRecord("line " + std::to_string(lineno) + ": bad " + what +
                          " value '" + s + "'");
  }
  return v;
}

}  // namespace

void write_imu_log(std::span<const ImuRecord> records, std::ostream& out) {
  const bool with_truth =
      !records.empty() && std::all_of(records.begin(), records.end(),
                                      [](const ImuRecord& r) { return r.truth.has_value(); });
  out << "t,gx,gy,gz,ax,ay,az,mx,my,mz";
  if (with_truth) out << ",qw,qx,qy,qz";
  out << "\n";

  for (const auto& r : records) {
    put(out, r.t);
    for (int i = 0; i < 3; ++i) {
      out << ',';
      put_deg(out, r.gyro(i));
    }
    for (int i = 0; i < 3; ++i) {
      out << ',';
      put(out, r.accel(i));
    }
    for (int i = 0; i < 3; ++i) {
      out << ',';
      put(out, r.mag(i));
    }
    if (with_truth) {
      out << ',';
      put(out, r.truth->eta);
      for (int i = 0; i < 3; ++i) {
        out << ',';
        put(out, r.truth->eps(i));
      }
    }
    out << "\n";
  }
}

std::vector<ImuRecord> read_imu_log(std::istream& in) {
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) {
    throw MalformedRecord("imu log: empty file");
  }
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::string base = "t,gx,gy,gz,ax,ay,az,mx,my,mz";
  bool with_truth = false;
  if (line == base) {
    with_truth = false;
  } else if (line == base + ",qw,qx,qy,qz") {
    with_truth = true;
  } else {
    throw MalformedRecord("imu log: unrecognized header '" + line + "'");
  }
  const std::size_t nfields = with_truth ? 14 : 10;

  std::vector<ImuRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != nfields) {
      throw MalformedRecord("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(nfields) + " fields, got " +
                            std::to_string(fields.size()));
    }

    ImuRecord r;
    r.t = parse_field(fields[0], lineno, "timestamp");
    if (!std::isfinite(r.t)) {
      throw MalformedRecord("line " + std::to_string(lineno) + ": non-finite timestamp");
    }
    if (!records.empty() && !(r.t > records.back().t)) {
      throw MalformedRecord("line " + std::to_string(lineno) +
                            ": timestamps must be strictly increasing");
    }
    for (int i = 0; i < 3; ++i) {
      r.gyro(i) = deg2rad(parse_field(fields[1 + i], lineno, "gyro"));
    }
    if (!r.gyro.allFinite()) {
      throw MalformedRecord("line " + std::to_string(lineno) + ": non-finite gyro sample");
    }
    for (int i = 0; i < 3; ++i) r.accel(i) = parse_field(fields[4 + i], lineno, "accel");
    for (int i = 0; i < 3; ++i) r.mag(i) = parse_field(fields[7 + i], lineno, "mag");

    if (with_truth) {
      UnitQuaternion q;
      q.eta = parse_field(fields[10], lineno, "quaternion");
      for (int i = 0; i < 3; ++i) {
        q.eps(i) = parse_field(fields[11 + i], lineno, "quaternion");
      }
      if (!std::isfinite(q.eta) || !q.eps.allFinite() || std::abs(q.norm() - 1.0) > 1e-6) {
        throw MalformedRecord("line " + std::to_string(lineno) +
                              ": truth quaternion is not unit norm");
      }
      r.truth = q;
    }
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

void write_run_csv_impl(const RunResult& result, std::ostream& out,
                        std::span<const std::size_t> indices) {
  out << "t,psi_true,theta_true,phi_true,psi_meas,theta_meas,phi_meas";
  for (const std::size_t i : indices) {
    const auto& name = result.traces[i].name;
    out << ',' << name << "_psi," << name << "_theta," << name << "_phi," << name << "_z";
    if (name == "rcae") {
      out << ",rcae_u,rcae_kp,rcae_ki,rcae_kd,rcae_eta_x,rcae_eta_y,rcae_eta_z";
    }
  }
  out << "\n";

  const auto put_euler = [&out](const std::optional<Euler321>& e) {
    out << ',';
    put_deg(out, e ? e->yaw : kNan);
    out << ',';
    put_deg(out, e ? e->pitch : kNan);
    out << ',';
    put_deg(out, e ? e->roll : kNan);
  };

  for (std::size_t k = 0; k < result.t.size(); ++k) {
    put(out, result.t[k]);
    put_euler(result.truth[k]);
    put_euler(result.meas[k]);
    for (const std::size_t i : indices) {
      const auto& tr = result.traces[i];
      put_euler(tr.euler[k]);
      out << ',';
      put(out, clamp_z(tr.z[k]));
      if (tr.name == "rcae") {
        out << ',';
        put(out, tr.u[k]);
        for (int g = 0; g < 3; ++g) {
          out << ',';
          put(out, tr.gains[k](g));
        }
        for (int g = 0; g < 3; ++g) {
          out << ',';
          put(out, tr.eta[k](g));
        }
      }
    }
    out << "\n";
  }
}

}  // namespace

void write_run_csv(const RunResult& result, std::ostream& out) {
  std::vector<std::size_t> indices(result.traces.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  write_run_csv_impl(result, out, indices);
}

void write_run_csv(const RunResult& result, std::ostream& out,
                   const std::string& estimator) {
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    if (result.traces[i].name == estimator) {
      const std::size_t indices[] = {i};
      write_run_csv_impl(result, out, indices);
      return;
    }
  }
  throw ConfigError("no trace for estimator '" + estimator + "'");
}

void write_summary(const RunResult& result, std::ostream& out) {
  char buf[160];
  out << "estimator      mean|z|      rms yaw err  rms pitch er rms roll err (final quarter)\n";
  for (const auto& pe : result.summary.estimators) {
    std::snprintf(buf, sizeof(buf), "%-12s %12.6g %12.6g %12.6g %12.6g\n",
                  pe.name.c_str(), pe.mean_abs_z, rad2deg(pe.rms_euler_error.x()),
                  rad2deg(pe.rms_euler_error.y()), rad2deg(pe.rms_euler_error.z()));
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "euler errors in degrees; wall %.3f ms\n",
                result.summary.wall_seconds * 1e3);
  out << buf;
  for (const auto& tr : result.traces) {
    for (const auto& note : tr.notes) {
      out << "note (" << tr.name << "): " << note << "\n";
    }
  }
}

}  // namespace rcae
