#include "rcae/so3.hpp"

#include <algorithm>
#include <cmath>

namespace rcae {

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
  if (a == -kPi) a = kPi;
  return a;
}

OrientationMatrix::OrientationMatrix(const Mat3& m) {
  const double drift = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (drift <= kOrthonormalTol && det > 0.0) {
    m_ = m;
    return;
  }
  if (drift < kProjectTol && det > 0.0) {
    m_ = project_to_so3(m).m_;
    return;
  }
  throw NotOrthonormal("matrix is not a rotation: orthonormality drift " +
                       std::to_string(drift) + ", det " + std::to_string(det));
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 uncross(const Mat3& m) {
  const double sym = (m + m.transpose()).norm();
  if (sym > kSkewTol * m.norm()) {
    throw NotSkew("matrix has a symmetric part of norm " + std::to_string(sym));
  }
  return Vec3((m(2, 1) - m(1, 2)) / 2.0,
              (m(0, 2) - m(2, 0)) / 2.0,
              (m(1, 0) - m(0, 1)) / 2.0);
}

OrientationMatrix exp_so3(const Vec3& v) {
  const double theta = v.norm();
  if (theta < kSmallAngle) {
    const Mat3 vx = cross_matrix(v);
    return OrientationMatrix(Mat3(Mat3::Identity() + vx + 0.5 * vx * vx));
  }
  const Mat3 nx = cross_matrix(Vec3(v / theta));
  return OrientationMatrix(Mat3(Mat3::Identity() + std::sin(theta) * nx +
                                (1.0 - std::cos(theta)) * nx * nx));
}

AxisAngle axis_angle(const OrientationMatrix& o) {
  const Mat3& m = o.matrix();
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(c);

  if (theta < kDegenerateAngle) {
    return AxisAngle{theta, Vec3::UnitZ(), true};
  }

  if (theta > kPi - kNearPiMargin) {
    // Near pi the antisymmetric part vanishes; recover the axis from the
    // symmetric part sym(O) = c*I + (1-c)*n*n^T, which stays well
    // conditioned there.  Pivot on the largest diagonal, signs within the
    // axis from the pivot row.
    const Mat3 t = ((m + m.transpose()) / 2.0 - c * Mat3::Identity()) / (1.0 - c);
    int p = 0;
    t.diagonal().maxCoeff(&p);
    Vec3 n;
    n(p) = std::sqrt(std::max(t(p, p), 0.0));
    n((p + 1) % 3) = t(p, (p + 1) % 3) / n(p);
    n((p + 2) % 3) = t(p, (p + 2) % 3) / n(p);
    n.normalize();
    // The symmetric part fixes the axis only up to a global sign.  The
    // antisymmetric part, 2*sin(theta)*n^x, still points along the true
    // axis for any angle short of an exact half turn; use it so the
    // reconstruction error stays at the sin(theta) scale instead of
    // jumping by 2*sin(theta) on a flipped sign.  At an exact half turn
    // either sign is the same rotation.
    const Vec3 a(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    if (a.dot(n) < 0.0) n = -n;
    // The trace pins the angle poorly here (its theta-derivative vanishes
    // at pi); the antisymmetric norm 2*sin(theta) recovers it with machine
    // accuracy on this branch.
    const double sin_theta = std::min(0.5 * a.norm(), 1.0);
    return AxisAngle{kPi - std::asin(sin_theta), n, true};
  }

  const double s = 2.0 * std::sin(theta);
  const Vec3 n((m(2, 1) - m(1, 2)) / s,
               (m(0, 2) - m(2, 0)) / s,
               (m(1, 0) - m(0, 1)) / s);
  return AxisAngle{theta, n.normalized(), false};
}

double attitude_error(const OrientationMatrix& o1, const OrientationMatrix& o2) {
  return (o1.matrix().transpose() * o2.matrix()).trace() - 3.0;
}

OrientationMatrix relative_orientation(const OrientationMatrix& est,
                                       const OrientationMatrix& meas) {
  return OrientationMatrix(Mat3(est.matrix() * meas.matrix().transpose()));
}

OrientationMatrix euler321_to_matrix(const Euler321& e) {
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  Mat3 o3, o2, o1;
  o3 << cy, sy, 0.0,
        -sy, cy, 0.0,
        0.0, 0.0, 1.0;
  o2 << cp, 0.0, -sp,
        0.0, 1.0, 0.0,
        sp, 0.0, cp;
  o1 << 1.0, 0.0, 0.0,
        0.0, cr, sr,
        0.0, -sr, cr;
  return OrientationMatrix(Mat3(o1 * o2 * o3));
}

EulerResult matrix_to_euler321(const OrientationMatrix& o) {
  const Mat3& m = o.matrix();
  const double sp = std::clamp(-m(0, 2), -1.0, 1.0);

  if (std::abs(sp) > 1.0 - 1e-9) {
    // Pitch singularity: only yaw -/+ roll is observable.  Convention: yaw
    // absorbs roll, roll reported as zero.
    EulerResult r;
    r.angles.pitch = std::copysign(kPi / 2.0, sp);
    r.angles.yaw = wrap_pi(std::atan2(-m(1, 0), m(1, 1)));
    r.angles.roll = 0.0;
    r.gimbal_lock = true;
    return r;
  }

  EulerResult r;
  r.angles.yaw = wrap_pi(std::atan2(m(0, 1), m(0, 0)));
  r.angles.pitch = std::asin(sp);
  r.angles.roll = wrap_pi(std::atan2(m(1, 2), m(2, 2)));
  r.gimbal_lock = false;
  return r;
}

UnitQuaternion UnitQuaternion::normalized() const {
  const double n = norm();
  if (n < 1e-12) {
    throw Degenerate("cannot normalize a near-zero quaternion");
  }
  return UnitQuaternion{eta / n, eps / n};
}

OrientationMatrix quat_to_matrix(const UnitQuaternion& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw NotOrthonormal("quaternion norm is " + std::to_string(q.norm()));
  }
  const UnitQuaternion u = q.normalized();
  const Mat3 ex = cross_matrix(u.eps);
  return OrientationMatrix(Mat3(Mat3::Identity() - 2.0 * u.eta * ex + 2.0 * ex * ex));
}

UnitQuaternion matrix_to_quat(const OrientationMatrix& o) {
  const Mat3& m = o.matrix();
  const double tr = m.trace();

  UnitQuaternion q;
  // Shepperd: pivot on the largest of {trace, diagonal entries} so every
  // division is by the largest component.
  int p = -1;
  double best = tr;
  for (int i = 0; i < 3; ++i) {
    if (m(i, i) > best) {
      best = m(i, i);
      p = i;
    }
  }

  if (p < 0) {
    q.eta = 0.5 * std::sqrt(1.0 + tr);
    const double d = 4.0 * q.eta;
    q.eps = Vec3(m(1, 2) - m(2, 1), m(2, 0) - m(0, 2), m(0, 1) - m(1, 0)) / d;
  } else {
    const int i = p, j = (p + 1) % 3, k = (p + 2) % 3;
    Vec3 e;
    e(i) = 0.5 * std::sqrt(1.0 - tr + 2.0 * m(i, i));
    const double d = 4.0 * e(i);
    e(j) = (m(i, j) + m(j, i)) / d;
    e(k) = (m(i, k) + m(k, i)) / d;
    q.eps = e;
    q.eta = (m(j, k) - m(k, j)) / d;
  }

  if (q.eta < 0.0) {
    q.eta = -q.eta;
    q.eps = -q.eps;
  }
  return q.normalized();
}

UnitQuaternion quat_compose(const UnitQuaternion& a, const UnitQuaternion& b) {
  // Product matching quat_to_matrix(a) * quat_to_matrix(b).
  UnitQuaternion q;
  q.eta = a.eta * b.eta - a.eps.dot(b.eps);
  q.eps = a.eta * b.eps + b.eta * a.eps + b.eps.cross(a.eps);
  return q;
}

OrientationMatrix project_to_so3(const Mat3& m) {
  if (m.determinant() <= 0.0) {
    throw Degenerate("projection input is not orientation-preserving");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-9) {
    throw Degenerate("projection input is numerically rank deficient");
  }
  const Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  return OrientationMatrix(r, OrientationMatrix::Unchecked{});
}

}  // namespace rcae
