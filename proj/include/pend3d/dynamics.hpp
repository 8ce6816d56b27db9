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

#ifndef PEND3D_DYNAMICS_HPP
#define PEND3D_DYNAMICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "pend3d/so3.hpp"

namespace pend3d {

inline const Vec3 kE3 = Vec3(0, 0, 1);

/// Rigid pendulum about a fixed pivot. The kinetic energy of the discrete
/// model uses the nonstandard inertia J_d = tr(J)/2 I - J, kept alongside J.
struct BodyParams {
    double m = 1.0;       // mass (kg)
    double g = 9.81;      // gravitational acceleration (m/s^2)
    Mat3 J = Mat3::Identity();    // inertia about the pivot (kg m^2)
    Mat3 Jd = Mat3::Identity();   // tr(J)/2 I - J
    Vec3 rho = Vec3::Zero();      // pivot-to-mass-center, body frame (m)

    static BodyParams make(double m, double g, const Mat3& J, const Vec3& rho) {
        if ((J - J.transpose()).norm() > 1e-12) {
            throw ValidationError("BodyParams: inertia must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat3> es(J);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            throw ValidationError("BodyParams: inertia must be positive definite");
        }
        BodyParams b;
        b.m = m;
        b.g = g;
        b.J = J;
        b.Jd = 0.5 * J.trace() * Mat3::Identity() - J;
        b.rho = rho;
        return b;
    }
};

struct DiscreteState {
    RotationMatrix R;
    Vec3 Pi = Vec3::Zero();   // body angular momentum, Pi = J Omega
};

struct StateTrajectory {
    double h = 0.0;
    std::vector<DiscreteState> states;   // length N+1
    std::vector<Vec3> controls;          // length N; controls[k] = u_{k+1}
};

/// Solves h hat(Pi) = F Jd - Jd F^T for the relative attitude F = exp(f) by
/// Newton iteration in the Lie algebra, initial guess f = h J^-1 Pi.
/// The exact Jacobian is -{tr(F Jd) I - F Jd} F dexp(f).
inline RotationMatrix solve_relative_attitude(const Vec3& Pi, const BodyParams& body,
                                              double h, int* iterations = nullptr,
                                              int max_newton = 50) {
    if (h <= 0.0) throw ValidationError("solve_relative_attitude: h must be positive");

    const Vec3 target = h * Pi;
    const double tol = 1e-14 * std::max(1.0, target.norm());
    Vec3 f = h * body.J.ldlt().solve(Pi);

    for (int it = 0; it <= max_newton; ++it) {
        const Mat3 F = exp_so3(f).mat();
        const Vec3 residual = target - vee(F * body.Jd - body.Jd * F.transpose(), 1e-8);
        if (residual.norm() <= tol) {
            if (iterations) *iterations = it;
            return RotationMatrix(F);
        }
        const Mat3 E = (F * body.Jd).trace() * Mat3::Identity() - F * body.Jd;
        const Mat3 Jg = E * F * dexp_right(f);
        f += Jg.partialPivLu().solve(residual);
    }
    throw NoConvergence("solve_relative_attitude: Newton iteration did not reach "
                        "tolerance; step size too large for this momentum");
}

/// One step of the Lie group variational integrator with control u_{k+1}.
inline DiscreteState lgvi_step(const DiscreteState& state, const Vec3& u_next,
                               const BodyParams& body, double h,
                               int* newton_iters = nullptr) {
    const RotationMatrix F = solve_relative_attitude(state.Pi, body, h, newton_iters);
    DiscreteState next;
    next.R = state.R * F;
    const Vec3 gamma = next.R.mat().transpose() * kE3;
    next.Pi = F.mat().transpose() * state.Pi +
              h * body.m * body.g * body.rho.cross(gamma) + h * gamma.cross(u_next);
    return next;
}

inline StateTrajectory integrate(const DiscreteState& initial,
                                 const std::vector<Vec3>& controls,
                                 const BodyParams& body, double h) {
    StateTrajectory traj;
    traj.h = h;
    traj.states.reserve(controls.size() + 1);
    traj.states.push_back(initial);
    traj.controls = controls;
    for (std::size_t k = 0; k < controls.size(); ++k) {
        try {
            traj.states.push_back(lgvi_step(traj.states.back(), controls[k], body, h));
        } catch (const NoConvergence& e) {
            throw NoConvergence(std::string(e.what()) + " (step " + std::to_string(k) + ")",
                                static_cast<int>(k));
        }
    }
    return traj;
}

/// Total energy: 1/2 Omega^T J Omega - m g e3^T R rho.
inline double energy(const DiscreteState& state, const BodyParams& body) {
    const Vec3 Omega = body.J.ldlt().solve(state.Pi);
    return 0.5 * Omega.dot(state.Pi) - body.m * body.g * kE3.dot(state.R.mat() * body.rho);
}

/// Vertical component of the inertial angular momentum, pi3 = e3^T R Pi.
inline double momentum_pi3(const DiscreteState& state, const BodyParams& /*body*/) {
    return kE3.dot(state.R.mat() * state.Pi);
}

/// Continuous equations of motion; reference right-hand side for test
/// integrators only. Control enters through the structured moment
/// M = R^T e3 x u.
inline std::pair<Mat3, Vec3> continuous_rhs(const DiscreteState& state, const Vec3& u,
                                            const BodyParams& body) {
    const Vec3 Omega = body.J.ldlt().solve(state.Pi);
    const Vec3 gamma = state.R.mat().transpose() * kE3;
    const Mat3 Rdot = state.R.mat() * hat(Omega);
    const Vec3 Pidot = -Omega.cross(state.Pi) +
                       body.m * body.g * body.rho.cross(gamma) + gamma.cross(u);
    return {Rdot, Pidot};
}

}  // namespace pend3d

#endif  // PEND3D_DYNAMICS_HPP
