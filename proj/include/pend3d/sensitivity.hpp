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

#ifndef PEND3D_SENSITIVITY_HPP
#define PEND3D_SENSITIVITY_HPP

#include <array>

#include "pend3d/extremal.hpp"

namespace pend3d {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5x6 = Eigen::Matrix<double, 5, 6>;

/// Attitude perturbations live in the Lie algebra: delta R = R hat(zeta).
struct PerturbationState {
    Vec3 zeta = Vec3::Zero();
    Vec3 dPi = Vec3::Zero();

    Vec6 stacked() const {
        Vec6 v;
        v << zeta, dPi;
        return v;
    }
};

/// Exact linearization of one step of the extremal flow, with the control
/// eliminated through the optimality condition:
///
///   x_{k+1}      = A11 x_k + A12 dlambda_k
///   dlambda_k    = A21 x_{k+1} + A22 dlambda_{k+1}      (k <= N-2)
///
/// where x = [zeta; dPi]. A22 is the costate coefficient matrix plus the
/// term from the control's dependence on dlambda2_{k+1}.
struct LinearizedStep {
    Mat6 A11 = Mat6::Zero();
    Mat6 A12 = Mat6::Zero();
    Mat6 A21 = Mat6::Zero();
    Mat6 A22 = Mat6::Zero();
    bool has_multiplier_part = false;
};

namespace detail {

// Directional derivative of the stacked multiplier-recursion product
// M_{k+1} lambda_{k+1} under trajectory perturbations (xi_{k+1}, zeta_{k+2},
// dPi_{k+1}), holding dlambda_{k+1} = 0. All formulas are exact product-rule
// differentials of the block definitions.
inline Vec6 d_costate_product(const ExtremalTrajectory& traj, int k,
                              const VariationBlocks& blk, const Vec3& xi1,
                              const Vec3& zeta2, const Vec3& dPi1) {
    const double h = traj.h;
    const BodyParams& body = traj.body;
    const Mat3& F1 = traj.F[k + 1].mat();
    const Vec3& Pi1 = traj.states[k + 1].Pi;
    const Vec3 gamma2 = traj.states[k + 2].R.mat().transpose() * kE3;
    const Vec3& u2 = traj.u[k + 1];
    const Vec3 lam1 = traj.lambda[k + 1].lambda1;
    const Vec3 lam2 = traj.lambda[k + 1].lambda2;

    const Mat3 dF = F1 * hat(xi1);
    const Vec3 dgamma2 = gamma2.cross(zeta2);          // -hat(zeta2) gamma2
    const Vec3 du2 = dgamma2.cross(lam2);              // control part from the states

    const Mat3 E = (F1 * body.Jd).trace() * Mat3::Identity() - F1 * body.Jd;
    (void)E;
    const Mat3 dE = (dF * body.Jd).trace() * Mat3::Identity() - dF * body.Jd;
    const Mat3 dEinv = -blk.Einv * dE * blk.Einv;
    const Mat3 dB = h * (dF.transpose() * blk.Einv + F1.transpose() * dEinv);
    const Vec3 dFtPi = dF.transpose() * Pi1 + F1.transpose() * dPi1;
    const Mat3 mgSrho = body.m * body.g * hat(body.rho);
    const Mat3 dC = h * mgSrho * (hat(dgamma2) * F1.transpose() + hat(gamma2) * dF.transpose());
    const Mat3 dD = dF.transpose() + hat(dFtPi) * blk.B + hat(F1.transpose() * Pi1) * dB +
                    h * mgSrho * (hat(dgamma2) * blk.B + hat(gamma2) * dB);

    const double ge = gamma2.dot(lam2);   // scalar e3^T R_{k+2} lambda2_{k+1}
    const double dge = dgamma2.dot(lam2);

    Vec6 out;
    out.head<3>() = dF * lam1 + dC.transpose() * lam2 -
                    h * ((dF * u2 + F1 * du2) * ge + (F1 * u2) * dge);
    out.tail<3>() = dB.transpose() * lam1 + dD.transpose() * lam2 -
                    h * ((dB.transpose() * u2 + blk.B.transpose() * du2) * ge +
                         (blk.B.transpose() * u2) * dge);
    return out;
}

}  // namespace detail

/// Builds the exact per-step blocks at index k of a given extremal.
/// The multiplier part (A21, A22) exists only for k <= N-2.
inline LinearizedStep linearized_step_blocks(const ExtremalTrajectory& traj, int k) {
    const double h = traj.h;
    const BodyParams& body = traj.body;
    const int N = traj.horizon();

    const Mat3& F = traj.F[k].mat();
    const Vec3& Pi = traj.states[k].Pi;
    const RotationMatrix& R1 = traj.states[k + 1].R;
    const VariationBlocks blk = variation_blocks(traj.F[k], Pi, R1, body, h);
    const Vec3 gamma1 = R1.mat().transpose() * kE3;
    const Vec3& u1 = traj.u[k];
    const Vec3& lam2 = traj.lambda[k].lambda2;

    LinearizedStep step;
    // Forward state linearization:
    //   zeta_{k+1} = F^T zeta_k + B dPi_k
    //   dPi_{k+1}  = G zeta_{k+1} + {F^T + hat(F^T Pi) B} dPi_k
    //                - hat(xi) F^T Pi contribution folded into hat(F^T Pi) B
    //                + h hat(gamma)^2 dlambda2_k
    // with G collecting the gravity and control dependence on zeta_{k+1}.
    const Mat3 G = h * (body.m * body.g * hat(body.rho) - hat(u1) - hat(gamma1) * hat(lam2)) *
                   hat(gamma1);
    step.A11.topLeftCorner<3, 3>() = blk.A;
    step.A11.topRightCorner<3, 3>() = blk.B;
    step.A11.bottomLeftCorner<3, 3>() = G * blk.A;
    step.A11.bottomRightCorner<3, 3>() =
        F.transpose() + hat(F.transpose() * Pi) * blk.B + G * blk.B;
    step.A12.bottomRightCorner<3, 3>() = h * hat(gamma1) * hat(gamma1);

    if (k + 1 < N) {
        const VariationBlocks blk1 =
            variation_blocks(traj.F[k + 1], traj.states[k + 1].Pi, traj.states[k + 2].R, body, h);
        const Vec3 gamma2 = traj.states[k + 2].R.mat().transpose() * kE3;
        const Vec3& u2 = traj.u[k + 1];
        const double ge = gamma2.dot(traj.lambda[k + 1].lambda2);

        // dlambda_k = W x_{k+1} + (M + V) dlambda_{k+1}; expose as A21, A22.
        const Mat6 M = detail::costate_matrix(blk1, traj.F[k + 1], gamma2, u2, h);
        Mat6 V = Mat6::Zero();
        V.topRightCorner<3, 3>() = -h * ge * traj.F[k + 1].mat() * hat(gamma2);
        V.bottomRightCorner<3, 3>() = -h * ge * blk1.B.transpose() * hat(gamma2);
        step.A22 = M + V;

        // W assembled column-by-column from the exact directional derivative;
        // a unit x_{k+1} = [zeta1; dPi1] induces xi_{k+1} = B_{k+1} dPi1 and
        // zeta_{k+2} = F_{k+1}^T zeta1 + xi_{k+1}.
        for (int j = 0; j < 6; ++j) {
            Vec3 zeta1 = Vec3::Zero(), dPi1 = Vec3::Zero();
            if (j < 3) zeta1(j) = 1.0; else dPi1(j - 3) = 1.0;
            const Vec3 xi1 = blk1.B * dPi1;
            const Vec3 zeta2 = traj.F[k + 1].mat().transpose() * zeta1 + xi1;
            step.A21.col(j) = detail::d_costate_product(traj, k, blk1, xi1, zeta2, dPi1);
        }
        step.has_multiplier_part = true;
    }
    return step;
}

/// Transition map of the full linearized optimality system. With the
/// initial state fixed, x_N = Psi12 dlambda0.
struct TransitionMatrix {
    Mat6 Psi12 = Mat6::Zero();
};

inline TransitionMatrix accumulate_transition(const ExtremalTrajectory& traj) {
    const int N = traj.horizon();
    // Six linear propagations, one per unit initial multiplier direction.
    Mat6 X = Mat6::Zero();       // columns are x_k
    Mat6 L = Mat6::Identity();   // columns are dlambda_k
    for (int k = 0; k < N; ++k) {
        const LinearizedStep step = linearized_step_blocks(traj, k);
        const Mat6 Xn = step.A11 * X + step.A12 * L;
        if (step.has_multiplier_part) {
            L = step.A22.partialPivLu().solve(L - step.A21 * Xn);
        }
        X = Xn;
    }
    TransitionMatrix out;
    out.Psi12 = X;
    return out;
}

/// Central-difference transition map on the nonlinear extremal flow; the
/// independent check on accumulate_transition, also used as the solver's
/// last-resort sensitivity.
inline Mat6 fd_transition(const ExtremalTrajectory& traj, double eps = 1e-6) {
    const int N = traj.horizon();
    const RotationMatrix& R0 = traj.states[0].R;
    const Vec3& Pi0 = traj.states[0].Pi;
    const Vec6 lam0 = traj.lambda[0].stacked();

    Mat6 Psi;
    for (int j = 0; j < 6; ++j) {
        Vec6 lp = lam0, lm = lam0;
        lp(j) += eps;
        lm(j) -= eps;
        const ExtremalTrajectory tp =
            propagate_extremal(R0, Pi0, Costate::from_stacked(lp), N, traj.body, traj.h);
        const ExtremalTrajectory tm =
            propagate_extremal(R0, Pi0, Costate::from_stacked(lm), N, traj.body, traj.h);
        const Vec3 zp = log_so3(RotationMatrix(traj.states[N].R.mat().transpose() *
                                               tp.states[N].R.mat()));
        const Vec3 zm = log_so3(RotationMatrix(traj.states[N].R.mat().transpose() *
                                               tm.states[N].R.mat()));
        Psi.col(j).head<3>() = (zp - zm) / (2.0 * eps);
        Psi.col(j).tail<3>() = (tp.states[N].Pi - tm.states[N].Pi) / (2.0 * eps);
    }
    return Psi;
}

/// Rewrites the terminal momentum rows of Psi12 in the inertial frame:
/// rows 4-6 become R_N (Psi3 - hat(Pi_N) Psi1) and R_N (Psi4 - hat(Pi_N) Psi2).
/// The sixth row is then identically zero by the symmetry.
inline Mat6 symmetry_transform(const Mat6& Psi12, const RotationMatrix& R_N,
                               const Vec3& Pi_N) {
    const Mat3 Psi1 = Psi12.topLeftCorner<3, 3>();
    const Mat3 Psi2 = Psi12.topRightCorner<3, 3>();
    const Mat3 Psi3 = Psi12.bottomLeftCorner<3, 3>();
    const Mat3 Psi4 = Psi12.bottomRightCorner<3, 3>();
    Mat6 out = Psi12;
    out.bottomLeftCorner<3, 3>() = R_N.mat() * (Psi3 - hat(Pi_N) * Psi1);
    out.bottomRightCorner<3, 3>() = R_N.mat() * (Psi4 - hat(Pi_N) * Psi2);
    return out;
}

/// First five rows of the transformed sensitivity, with diagnostics.
struct ReducedSensitivity {
    Mat5x6 Xi = Mat5x6::Zero();
    double last_row_norm = 0.0;
    double cond = 0.0;
};

inline ReducedSensitivity reduce_sensitivity(const Mat6& transformed) {
    ReducedSensitivity red;
    red.Xi = transformed.topRows<5>();
    red.last_row_norm = transformed.row(5).norm();
    Eigen::JacobiSVD<Mat5x6> svd(red.Xi);
    const auto& sv = svd.singularValues();
    red.cond = sv(0) / std::max(sv(4), 1e-300);
    return red;
}

/// Minimum-norm multiplier update: dlambda0 = Xi^T (Xi Xi^T)^-1 target,
/// with the normal equations solved by factorization.
inline Vec6 reduce_and_pinv(const Mat6& transformed, const Vec5& target,
                            ReducedSensitivity* diag = nullptr) {
    const ReducedSensitivity red = reduce_sensitivity(transformed);
    if (diag) *diag = red;
    if (red.cond * red.cond > 1e12) {
        throw IllConditioned("reduce_and_pinv: Xi Xi^T condition number exceeds 1e12");
    }
    const Eigen::Matrix<double, 5, 5> gram = red.Xi * red.Xi.transpose();
    return red.Xi.transpose() * gram.ldlt().solve(target);
}

/// Five-dimensional terminal boundary condition error x'_N together with
/// the two reported norms (attitude log error and body momentum error).
struct TerminalError {
    Vec5 x = Vec5::Zero();
    double attitude_norm = 0.0;   // ||logm(R_N^{d,T} R_N)||
    double momentum_norm = 0.0;   // ||Pi_N^d - Pi_N||
};

inline TerminalError terminal_error(const RotationMatrix& R_N, const Vec3& Pi_N,
                                    const RotationMatrix& RNd, const Vec3& PiNd) {
    TerminalError err;
    const Vec3 zeta = log_so3(RotationMatrix(R_N.mat().transpose() * RNd.mat()));
    const Vec3 dpi = RNd.mat() * PiNd - R_N.mat() * Pi_N;
    err.x.head<3>() = zeta;
    err.x(3) = dpi(0);
    err.x(4) = dpi(1);
    err.attitude_norm = log_so3(RotationMatrix(RNd.mat().transpose() * R_N.mat())).norm();
    err.momentum_norm = (PiNd - Pi_N).norm();
    return err;
}

}  // namespace pend3d

#endif  // PEND3D_SENSITIVITY_HPP
