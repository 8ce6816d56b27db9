/*
 Copyright 2026 pend3d contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef PEND3D_SO3_HPP
#define PEND3D_SO3_HPP

#include <cmath>
#include <Eigen/Dense>

#include "pend3d/errors.hpp"

namespace pend3d {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric matrix of v, so that hat(v)*y == v.cross(y).
inline Mat3 hat(const Vec3& v) {
    Mat3 S;
    S <<    0, -v(2),  v(1),
         v(2),     0, -v(0),
        -v(1),  v(0),     0;
    return S;
}

/// Inverse of hat. Rejects inputs that are not skew-symmetric within tol.
inline Vec3 vee(const Mat3& m, double tol = 1e-10) {
    if ((m + m.transpose()).norm() > tol) {
        throw NonSkewInput("vee: matrix is not skew-symmetric");
    }
    return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// Attitude element of SO(3). Construction validates group membership;
/// out-of-tolerance inputs are rejected, not re-orthonormalized.
class RotationMatrix {
public:
    static constexpr double kGroupTol = 1e-12;

    RotationMatrix() : m_(Mat3::Identity()) {}

    explicit RotationMatrix(const Mat3& m) : m_(m) {
        const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
        if (ortho > kGroupTol || std::abs(m.determinant() - 1.0) > kGroupTol) {
            throw NotRotation("RotationMatrix: input is not in SO(3)");
        }
    }

    static RotationMatrix identity() { return RotationMatrix(); }

    /// Group product; the product of rotations stays on the group.
    RotationMatrix operator*(const RotationMatrix& rhs) const {
        RotationMatrix out;
        out.m_ = m_ * rhs.m_;
        return out;
    }

    RotationMatrix transpose() const {
        RotationMatrix out;
        out.m_ = m_.transpose();
        return out;
    }

    const Mat3& mat() const { return m_; }

private:
    Mat3 m_;
};

namespace detail {

// sin(t)/t and the two Rodrigues coefficients, with series expansions
// below the switch point so nothing divides by a vanishing angle.
inline double sinc(double t) {
    if (std::abs(t) < 1e-6) return 1.0 - t * t / 6.0;
    return std::sin(t) / t;
}

inline double one_minus_cos_over_t2(double t) {
    if (std::abs(t) < 1e-6) return 0.5 - t * t / 24.0;
    return (1.0 - std::cos(t)) / (t * t);
}

inline double t_minus_sin_over_t3(double t) {
    if (std::abs(t) < 1e-6) return 1.0 / 6.0 - t * t / 120.0;
    return (t - std::sin(t)) / (t * t * t);
}

}  // namespace detail

/// Rodrigues formula: exp(hat(v)).
inline RotationMatrix exp_so3(const Vec3& v) {
    const double t = v.norm();
    const Mat3 S = hat(v);
    return RotationMatrix(Mat3::Identity() + detail::sinc(t) * S +
                          detail::one_minus_cos_over_t2(t) * S * S);
}

/// Right (body-frame) Jacobian of exp_so3: d/de exp(v + e d) = exp(v) hat(Jr(v) d).
inline Mat3 dexp_right(const Vec3& v) {
    const double t = v.norm();
    const Mat3 S = hat(v);
    return Mat3::Identity() - detail::one_minus_cos_over_t2(t) * S +
           detail::t_minus_sin_over_t3(t) * S * S;
}

/// Principal logarithm, ||result|| <= pi. At angle exactly pi the axis sign
/// is ambiguous; the representative with positive first nonzero component
/// is returned.
inline Vec3 log_so3(const RotationMatrix& R) {
    const Mat3& m = R.mat();
    const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double t = std::acos(c);
    // a = sin(t) * axis
    const Vec3 a = 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));

    if (t < M_PI - 1e-3) {
        return a / detail::sinc(t);
    }

    // Near pi the skew part nearly vanishes; take the axis from the
    // symmetric part, B = (1 - cos t) n n^T, and the residual angle from
    // ||a|| = sin(t), which stays well conditioned as t -> pi.
    const Mat3 B = 0.5 * (m + m.transpose()) - c * Mat3::Identity();
    int imax = 0;
    B.diagonal().maxCoeff(&imax);
    Vec3 n = B.col(imax).normalized();
    if (a.dot(n) < 0.0) n = -n;
    const double angle = M_PI - std::asin(std::clamp(a.norm(), 0.0, 1.0));
    if (M_PI - angle < 1e-9) {
        // pi-rotation tie break: axis with positive first nonzero component
        for (int i = 0; i < 3; ++i) {
            if (std::abs(n(i)) > 1e-12) {
                if (n(i) < 0.0) n = -n;
                break;
            }
        }
    }
    return angle * n;
}

}  // namespace pend3d

#endif  // PEND3D_SO3_HPP
