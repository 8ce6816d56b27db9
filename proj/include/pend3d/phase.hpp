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

#ifndef PEND3D_PHASE_HPP
#define PEND3D_PHASE_HPP

#include <vector>

#include "pend3d/so3.hpp"

namespace pend3d {

/// Gravity direction in the body frame along a trajectory, Gamma_k = R_k^T e3.
struct ReducedTrajectory {
    std::vector<Vec3> gamma;
};

/// Infinitesimal geometric phase per unit spherical area at Gamma:
/// (2 ||J Gamma||^2 - tr(J) Gamma^T J Gamma) / (Gamma^T J Gamma)^2.
inline double phase_integrand(const Vec3& gamma, const Mat3& J) {
    const Vec3 Jg = J * gamma;
    const double q = gamma.dot(Jg);
    return (2.0 * Jg.squaredNorm() - J.trace() * q) / (q * q);
}

namespace detail {

/// Signed solid angle of the spherical triangle (a, b, c) (unit vectors),
/// positive for counterclockwise orientation seen from outside the sphere.
inline double signed_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

inline double integrate_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                 const Mat3& J, double coarse, double tol, int depth) {
    const Vec3 ab = (a + b).normalized();
    const Vec3 bc = (b + c).normalized();
    const Vec3 ca = (c + a).normalized();
    auto piece = [&](const Vec3& x, const Vec3& y, const Vec3& z) {
        return phase_integrand((x + y + z).normalized(), J) * signed_solid_angle(x, y, z);
    };
    const double fine = piece(a, ab, ca) + piece(ab, b, bc) +
                        piece(ca, bc, c) + piece(ab, bc, ca);
    // The midpoint estimate gains a factor ~4 per level, so halving the
    // tolerance per level keeps the recursion finite.
    if (depth >= 16 || std::abs(fine - coarse) < tol) return fine;
    return integrate_triangle(a, ab, ca, J, piece(a, ab, ca), tol / 2.0, depth + 1) +
           integrate_triangle(ab, b, bc, J, piece(ab, b, bc), tol / 2.0, depth + 1) +
           integrate_triangle(ca, bc, c, J, piece(ca, bc, c), tol / 2.0, depth + 1) +
           integrate_triangle(ab, bc, ca, J, piece(ab, bc, ca), tol / 2.0, depth + 1);
}

// wraps into (-pi, pi]
inline double wrap_pi(double t) {
    t = std::fmod(t, 2.0 * M_PI);
    if (t > M_PI) t -= 2.0 * M_PI;
    if (t <= -M_PI) t += 2.0 * M_PI;
    return t;
}

}  // namespace detail

/// Surface integral of the phase integrand over the region bounded by a
/// closed reduced loop: fan triangulation from the loop's normalized
/// spherical centroid with recursive triangle subdivision. Orientation,
/// and therefore the sign of the result, comes from the loop's winding.
/// Degenerate (zero-area) loops yield 0 with degenerate=true.
inline double surface_phase(const ReducedTrajectory& loop, const Mat3& J,
                            bool* degenerate = nullptr, double tol = 1e-6) {
    if (degenerate) *degenerate = false;
    if (loop.gamma.size() < 3) throw OpenLoop("surface_phase: loop too short");
    if ((loop.gamma.front() - loop.gamma.back()).norm() > 1e-8) {
        throw OpenLoop("surface_phase: reduced trajectory is not closed");
    }

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& g : loop.gamma) centroid += g;
    if (centroid.norm() < 1e-9) centroid = loop.gamma.front();
    centroid.normalize();

    // Enclosed signed area first; a back-and-forth arc encloses nothing.
    double area = 0.0;
    const std::size_t n = loop.gamma.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        area += detail::signed_solid_angle(centroid, loop.gamma[i], loop.gamma[i + 1]);
    }
    if (std::abs(area) < 1e-12) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }

    double theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& b = loop.gamma[i];
        const Vec3& c = loop.gamma[i + 1];
        if ((b - c).norm() < 1e-15) continue;
        const double coarse =
            phase_integrand((centroid + b + c).normalized(), J) *
            detail::signed_solid_angle(centroid, b, c);
        theta += detail::integrate_triangle(centroid, b, c, J, coarse, tol, 0);
    }
    return detail::wrap_pi(theta);
}

/// Yaw angle between two attitudes on the same reduced point: the third
/// component of log(R_end R_start^T), which must be a near-vertical rotation.
inline double yaw_between(const RotationMatrix& R_start, const RotationMatrix& R_end) {
    const Vec3 l = log_so3(RotationMatrix(R_end.mat() * R_start.mat().transpose()));
    if (Vec3(l(0), l(1), 0.0).norm() > 1e-6) {
        throw NotVerticalRelation(
            "yaw_between: attitudes are not related by a rotation about gravity");
    }
    return l(2);
}

}  // namespace pend3d

#endif  // PEND3D_PHASE_HPP
