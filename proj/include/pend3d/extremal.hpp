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

#ifndef PEND3D_EXTREMAL_HPP
#define PEND3D_EXTREMAL_HPP

#include <vector>

#include "pend3d/dynamics.hpp"

namespace pend3d {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Multipliers attached to the discrete kinematic (lambda1) and dynamic
/// (lambda2) equations of motion.
struct Costate {
    Vec3 lambda1 = Vec3::Zero();
    Vec3 lambda2 = Vec3::Zero();

    Vec6 stacked() const {
        Vec6 v;
        v << lambda1, lambda2;
        return v;
    }
    static Costate from_stacked(const Vec6& v) {
        return Costate{v.head<3>(), v.tail<3>()};
    }
};

/// Coefficient blocks of the discrete multiplier recursion at one step.
/// B maps a momentum perturbation dPi_k to the Lie-algebra perturbation
/// xi_k of the relative attitude F_k.
struct VariationBlocks {
    Mat3 A, B, C, D;
    Mat3 Einv;  // {tr(F Jd) I - F Jd}^-1, reused by the linearization
};

/// Optimality condition for the structured control: u_{k+1} = R_{k+1}^T e3 x lambda2_k.
inline Vec3 control_from_costate(const RotationMatrix& R_next, const Vec3& lambda2) {
    return (R_next.mat().transpose() * kE3).cross(lambda2);
}

inline VariationBlocks variation_blocks(const RotationMatrix& F_k, const Vec3& Pi_k,
                                        const RotationMatrix& R_next,
                                        const BodyParams& body, double h) {
    const Mat3& F = F_k.mat();
    const Mat3 E = (F * body.Jd).trace() * Mat3::Identity() - F * body.Jd;
    Eigen::FullPivLU<Mat3> lu(E);
    if (!lu.isInvertible() ||
        lu.rcond() < 1e-12) {
        throw SingularVariation("variation_blocks: tr(F Jd) I - F Jd is numerically singular");
    }
    VariationBlocks blk;
    blk.Einv = lu.inverse();
    const Vec3 gamma = R_next.mat().transpose() * kE3;
    blk.A = F.transpose();
    blk.B = h * F.transpose() * blk.Einv;
    blk.C = h * body.m * body.g * hat(body.rho) * hat(gamma) * F.transpose();
    blk.D = F.transpose() + hat(F.transpose() * Pi_k) * blk.B +
            h * body.m * body.g * hat(body.rho) * hat(gamma) * blk.B;
    return blk;
}

namespace detail {

/// The 6x6 coefficient matrix of the multiplier recursion,
/// lambda_k = M(u_{k+2}) lambda_{k+1}, evaluated with a given u_{k+2}.
inline Mat6 costate_matrix(const VariationBlocks& blk, const RotationMatrix& F_next,
                           const Vec3& gamma2, const Vec3& u2, double h) {
    Mat6 M;
    M.topLeftCorner<3, 3>() = blk.A.transpose();
    M.topRightCorner<3, 3>() =
        blk.C.transpose() - h * (F_next.mat() * u2) * gamma2.transpose();
    M.bottomLeftCorner<3, 3>() = blk.B.transpose();
    M.bottomRightCorner<3, 3>() =
        blk.D.transpose() - h * (blk.B.transpose() * u2) * gamma2.transpose();
    return M;
}

}  // namespace detail

/// Context for one costate step: states at k+1 and k+2 (which do not
/// depend on lambda_{k+1}) and the variation blocks at k+1.
struct CostateStepContext {
    VariationBlocks blocks;     // at k+1
    RotationMatrix F_next;      // F_{k+1}
    RotationMatrix R_next2;     // R_{k+2}
    double h = 0.0;
};

/// Solves the implicit multiplier recursion for lambda_{k+1} given lambda_k.
/// The coefficient matrix depends on u_{k+2} = R_{k+2}^T e3 x lambda2_{k+1},
/// so the linear solve is repeated with the control re-evaluated at the
/// current iterate until self-consistent. If the fixed point stagnates,
/// the 6-dim nonlinear system is finished off by Newton with an FD Jacobian.
inline Costate costate_step(const Costate& lambda_k, const CostateStepContext& ctx,
                            int* sweeps = nullptr, int max_fp = 50) {
    const Vec3 gamma2 = ctx.R_next2.mat().transpose() * kE3;
    const Vec6 rhs = lambda_k.stacked();
    const double tol = 1e-13 * (1.0 + rhs.norm());

    auto residual = [&](const Vec6& lam) -> Vec6 {
        const Vec3 u2 = gamma2.cross(lam.tail<3>());
        return detail::costate_matrix(ctx.blocks, ctx.F_next, gamma2, u2, ctx.h) * lam - rhs;
    };

    Vec6 lam = rhs;  // multipliers vary smoothly along extremals
    double prev_err = residual(lam).norm();
    if (prev_err <= tol) {
        if (sweeps) *sweeps = 0;
        return Costate::from_stacked(lam);
    }

    for (int it = 1; it <= max_fp; ++it) {
        const Vec3 u2 = gamma2.cross(lam.tail<3>());
        const Mat6 M = detail::costate_matrix(ctx.blocks, ctx.F_next, gamma2, u2, ctx.h);
        Eigen::PartialPivLU<Mat6> lu(M);
        const Vec6 trial = lu.solve(rhs);
        if ((M * trial - rhs).norm() > 1e-6 * (1.0 + rhs.norm()) && !M.allFinite()) {
            throw SingularVariation("costate_step: coefficient matrix not invertible");
        }
        lam = trial;
        const double err = residual(lam).norm();
        if (err <= tol) {
            if (sweeps) *sweeps = it;
            return Costate::from_stacked(lam);
        }
        if (err > 0.9 * prev_err) break;  // stagnation: hand off to Newton
        prev_err = err;
    }

    // Newton on H(lam) = M(lam) lam - lambda_k with central-difference Jacobian.
    for (int it = 0; it < max_fp; ++it) {
        const Vec6 r0 = residual(lam);
        if (r0.norm() <= tol) {
            if (sweeps) *sweeps = -it;
            return Costate::from_stacked(lam);
        }
        Mat6 Jac;
        const double eps = 1e-7 * (1.0 + lam.norm());
        for (int j = 0; j < 6; ++j) {
            Vec6 lp = lam, lm = lam;
            lp(j) += eps;
            lm(j) -= eps;
            Jac.col(j) = (residual(lp) - residual(lm)) / (2.0 * eps);
        }
        lam -= Jac.partialPivLu().solve(r0);
    }
    throw NoConvergence("costate_step: multiplier recursion did not converge");
}

/// Full extremal trajectory from an initial multiplier guess.
struct ExtremalTrajectory {
    double h = 0.0;
    BodyParams body;
    std::vector<DiscreteState> states;   // length N+1
    std::vector<RotationMatrix> F;       // length N
    std::vector<Vec3> u;                 // length N; u[k] = u_{k+1}
    std::vector<Costate> lambda;         // length N; lambda[k] = lambda_k
    double performance_index = 0.0;      // sum h/2 ||u_{k+1}||^2

    int horizon() const { return static_cast<int>(u.size()); }
};

/// Forward sweep of the necessary conditions: states and relative attitudes
/// run two steps ahead of the multipliers, which are advanced by
/// costate_step as soon as the data they need exists.
inline ExtremalTrajectory propagate_extremal(const RotationMatrix& R0, const Vec3& Pi0,
                                             const Costate& lambda0, int N,
                                             const BodyParams& body, double h) {
    if (N < 2) throw ValidationError("propagate_extremal: N must be at least 2");

    ExtremalTrajectory traj;
    traj.h = h;
    traj.body = body;
    traj.states.resize(N + 1);
    traj.F.resize(N);
    traj.u.resize(N);
    traj.lambda.resize(N);

    traj.states[0] = DiscreteState{R0, Pi0};
    traj.lambda[0] = lambda0;
    traj.F[0] = solve_relative_attitude(Pi0, body, h);
    traj.states[1].R = R0 * traj.F[0];

    for (int k = 0; k < N; ++k) {
        const RotationMatrix& R_next = traj.states[k + 1].R;
        const Vec3 gamma = R_next.mat().transpose() * kE3;
        traj.u[k] = control_from_costate(R_next, traj.lambda[k].lambda2);
        traj.states[k + 1].Pi = traj.F[k].mat().transpose() * traj.states[k].Pi +
                                h * body.m * body.g * body.rho.cross(gamma) +
                                h * gamma.cross(traj.u[k]);
        traj.performance_index += 0.5 * h * traj.u[k].squaredNorm();

        if (k + 1 < N) {
            try {
                traj.F[k + 1] = solve_relative_attitude(traj.states[k + 1].Pi, body, h);
            } catch (const NoConvergence& e) {
                throw NoConvergence(std::string(e.what()) + " (step " + std::to_string(k + 1) + ")",
                                    k + 1);
            }
            traj.states[k + 2].R = R_next * traj.F[k + 1];
        }
        if (k + 1 < N) {
            CostateStepContext ctx{
                variation_blocks(traj.F[k + 1], traj.states[k + 1].Pi, traj.states[k + 2].R,
                                 body, h),
                traj.F[k + 1], traj.states[k + 2].R, h};
            traj.lambda[k + 1] = costate_step(traj.lambda[k], ctx);
        }
    }
    return traj;
}

}  // namespace pend3d

#endif  // PEND3D_EXTREMAL_HPP
