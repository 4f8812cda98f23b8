#pragma once

#include <Eigen/Dense>

#include "rcae/errors.hpp"

// Attitude primitives on SO(3).
//
// Frame convention used throughout: an orientation matrix O_{B/A} resolves
// A-frame coordinates into the B frame, x|B = O_{B/A} * x|A.  Kinematics are
// dO/dt = -w^x O with w the angular rate of B relative to A resolved in B, so
// a discrete propagation step is O(t+dt) = exp_so3(-w*dt) * O(t).

namespace rcae {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double d) { return d * (kPi / 180.0); }
constexpr double rad2deg(double r) { return r * (180.0 / kPi); }

// Wraps an angle into (-pi, pi].
double wrap_pi(double a);

// Tolerances shared by the SO(3) layer.
inline constexpr double kOrthonormalTol = 1e-9;   // accept as-is below this
inline constexpr double kProjectTol = 1e-3;       // repairable drift below this
inline constexpr double kSmallAngle = 1e-6;       // exp_so3 series branch
inline constexpr double kDegenerateAngle = 1e-7;  // axis undefined below this
inline constexpr double kNearPiMargin = 1e-4;     // axis-from-diagonal branch
inline constexpr double kSkewTol = 1e-6;          // relative symmetry budget

class OrientationMatrix;

// Nearest rotation to M in the Frobenius sense (symmetric orthogonalization).
// Throws Degenerate if the smallest singular value is below 1e-9 or M is not
// orientation-preserving.
OrientationMatrix project_to_so3(const Mat3& m);

// A member of SO(3), orthonormal with determinant +1 by construction.
class OrientationMatrix {
 public:
  OrientationMatrix() : m_(Mat3::Identity()) {}

  // Validates the matrix.  Drift below kOrthonormalTol is accepted verbatim,
  // drift below kProjectTol is repaired through project_to_so3, anything
  // worse throws NotOrthonormal.
  explicit OrientationMatrix(const Mat3& m);

  static OrientationMatrix identity() { return OrientationMatrix(); }

  const Mat3& matrix() const { return m_; }

  OrientationMatrix transposed() const {
    return OrientationMatrix(m_.transpose(), Unchecked{});
  }

  Vec3 operator*(const Vec3& x) const { return m_ * x; }

  OrientationMatrix operator*(const OrientationMatrix& rhs) const {
    // Product of two members stays in SO(3) to machine precision.
    return OrientationMatrix(m_ * rhs.m_, Unchecked{});
  }

 private:
  struct Unchecked {};
  OrientationMatrix(const Mat3& m, Unchecked) : m_(m) {}
  OrientationMatrix(Mat3&& m, Unchecked) : m_(std::move(m)) {}

  friend OrientationMatrix project_to_so3(const Mat3&);

  Mat3 m_;
};

// v -> v^x, the matrix with cross_matrix(v) * w == v.cross(w).
Mat3 cross_matrix(const Vec3& v);

// Inverse of cross_matrix on the skew part of M.  Throws NotSkew when the
// symmetric part exceeds kSkewTol relative to ||M||_F.
Vec3 uncross(const Mat3& m);

// Matrix exponential of v^x via the Rodrigues formula, with a second-order
// series branch below kSmallAngle for numerical cleanliness near zero.
OrientationMatrix exp_so3(const Vec3& v);

struct AxisAngle {
  double angle = 0.0;   // in [0, pi]
  Vec3 axis = Vec3::UnitZ();
  // Set when the axis is poorly determined: angle < kDegenerateAngle (axis
  // falls back to +z) or angle > pi - kNearPiMargin (axis recovered from the
  // symmetric part, sign oriented by the residual antisymmetric part).
  bool degenerate = false;
};

// Inverse of exp_so3 up to the axis sign ambiguity at pi.
AxisAngle axis_angle(const OrientationMatrix& o);

// tr(O1^T O2 - I3), in [-4, 0]: 0 iff O1 == O2, -4 at 180 degrees apart.
double attitude_error(const OrientationMatrix& o1, const OrientationMatrix& o2);

// O_est * O_meas^T, the rotation carrying the measured frame to the estimate.
OrientationMatrix relative_orientation(const OrientationMatrix& est,
                                       const OrientationMatrix& meas);

// Aerospace 3-2-1 (yaw-pitch-roll) Euler angles, radians.
struct Euler321 {
  double yaw = 0.0;    // psi, about axis 3
  double pitch = 0.0;  // theta, about axis 2
  double roll = 0.0;   // phi, about axis 1
};

// O = O1(roll) * O2(pitch) * O3(yaw) with Oi the elementary rotation
// resolving A coordinates into the rotated frame; Oi(a) == exp_so3(-a*ei).
OrientationMatrix euler321_to_matrix(const Euler321& e);

struct EulerResult {
  Euler321 angles;
  // Set when |sin(pitch)| > 1 - 1e-9.  Yaw then absorbs roll (roll = 0).
  bool gimbal_lock = false;
};

EulerResult matrix_to_euler321(const OrientationMatrix& o);

// Unit quaternion (eta, eps) with O = I - 2*eta*eps^x + 2*(eps^x)^2, so that
// quat_to_matrix(q) == exp_so3(theta*n) for eta = cos(theta/2),
// eps = -sin(theta/2)*n.  Canonical representative has eta >= 0.
struct UnitQuaternion {
  double eta = 1.0;
  Vec3 eps = Vec3::Zero();

  double norm() const { return std::sqrt(eta * eta + eps.squaredNorm()); }
  UnitQuaternion normalized() const;
};

OrientationMatrix quat_to_matrix(const UnitQuaternion& q);

// Shepperd's method (largest-pivot), canonicalized to eta >= 0.
UnitQuaternion matrix_to_quat(const OrientationMatrix& o);

// Composition q = quat_compose(a, b) satisfying
// quat_to_matrix(q) == quat_to_matrix(a) * quat_to_matrix(b).
UnitQuaternion quat_compose(const UnitQuaternion& a, const UnitQuaternion& b);

}  // namespace rcae
