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

#ifndef PEND3D_CASES_HPP
#define PEND3D_CASES_HPP

#include <string>

#include "pend3d/shooting.hpp"

namespace pend3d {

/// Elliptic-cylinder pendulum, body A.
inline BodyParams body_a(double g = 9.81) {
    return BodyParams::make(1.0, g, Vec3(0.13, 0.28, 0.17).asDiagonal(),
                            Vec3(0.0, 0.0, 0.3));
}

/// Elliptic-cylinder pendulum, body B.
inline BodyParams body_b(double g = 9.81) {
    return BodyParams::make(1.0, g, Vec3(0.22, 0.23, 0.03).asDiagonal(),
                            Vec3(0.0, 0.0, 0.4));
}

/// Built-in maneuver library: hanging equilibrium to hanging equilibrium
/// with a pure yaw rotation, which only the geometric phase can produce.
///   i:   body A, 90 deg      ii: body A, 180 deg
///   iii: body B, 90 deg      iv: body B, 180 deg
inline ProblemSpec named_case(const std::string& id, int N = 100, double h = 0.01,
                              double g = 9.81) {
    ProblemSpec p;
    p.R0 = RotationMatrix::identity();
    p.Pi0 = Vec3::Zero();
    p.PiNd = Vec3::Zero();
    p.N = N;
    p.h = h;

    Mat3 yaw90;
    yaw90 << 0, -1, 0,
             1,  0, 0,
             0,  0, 1;
    const Mat3 yaw180 = Vec3(-1, -1, 1).asDiagonal();

    if (id == "i") {
        p.body = body_a(g);
        p.RNd = RotationMatrix(yaw90);
    } else if (id == "ii") {
        p.body = body_a(g);
        p.RNd = RotationMatrix(yaw180);
    } else if (id == "iii") {
        p.body = body_b(g);
        p.RNd = RotationMatrix(yaw90);
    } else if (id == "iv") {
        p.body = body_b(g);
        p.RNd = RotationMatrix(yaw180);
    } else {
        throw ValidationError("named_case: unknown case id '" + id + "'");
    }
    return p;
}

}  // namespace pend3d

#endif  // PEND3D_CASES_HPP
