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

#ifndef PEND3D_IO_HPP
#define PEND3D_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pend3d/shooting.hpp"

namespace pend3d {

/// Row-oriented trajectory record as stored on disk. The control and
/// multiplier columns of the final row are zero padding; u on row k is the
/// control applied over [t_k, t_{k+1}].
struct TrajectoryRecord {
    double h = 0.0;
    std::vector<DiscreteState> states;
    std::vector<Vec3> controls;      // length N (padded on read if absent)
    std::vector<Costate> lambdas;    // length N, zero when not applicable
};

namespace detail {

inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

inline const char* kTrajectoryHeader =
    "k,t,R00,R01,R02,R10,R11,R12,R20,R21,R22,Pi0,Pi1,Pi2,u0,u1,u2,"
    "lam1_0,lam1_1,lam1_2,lam2_0,lam2_1,lam2_2,pi3,energy";

inline void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec,
                                 const BodyParams& body) {
    std::ofstream out(path);
    if (!out) throw ValidationError("write_trajectory_csv: cannot open " + path);
    out << kTrajectoryHeader << "\n";
    const std::size_t N = rec.states.empty() ? 0 : rec.states.size() - 1;
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        const DiscreteState& s = rec.states[k];
        out << k << ',' << detail::fmt17(static_cast<double>(k) * rec.h);
        const Mat3& R = s.R.mat();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out << ',' << detail::fmt17(R(i, j));
        for (int i = 0; i < 3; ++i) out << ',' << detail::fmt17(s.Pi(i));
        const Vec3 u = k < rec.controls.size() ? rec.controls[k] : Vec3::Zero();
        for (int i = 0; i < 3; ++i) out << ',' << detail::fmt17(u(i));
        const Costate lam = k < rec.lambdas.size() ? rec.lambdas[k] : Costate{};
        for (int i = 0; i < 3; ++i) out << ',' << detail::fmt17(lam.lambda1(i));
        for (int i = 0; i < 3; ++i) out << ',' << detail::fmt17(lam.lambda2(i));
        out << ',' << detail::fmt17(momentum_pi3(s, body));
        out << ',' << detail::fmt17(energy(s, body));
        out << "\n";
        (void)N;
    }
}

inline TrajectoryRecord read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("read_trajectory_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryHeader) {
        throw ParseError("read_trajectory_csv: unexpected header in " + path);
    }
    TrajectoryRecord rec;
    double prev_t = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> vals;
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != 25) throw ParseError("read_trajectory_csv: malformed row");
        DiscreteState s;
        Mat3 R;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) R(i, j) = vals[2 + 3 * i + j];
        s.R = RotationMatrix(R);
        s.Pi = Vec3(vals[11], vals[12], vals[13]);
        rec.states.push_back(s);
        rec.controls.emplace_back(vals[14], vals[15], vals[16]);
        rec.lambdas.push_back(Costate{Vec3(vals[17], vals[18], vals[19]),
                                      Vec3(vals[20], vals[21], vals[22])});
        if (rec.states.size() == 2) rec.h = vals[1] - prev_t;
        prev_t = vals[1];
    }
    if (!rec.controls.empty()) {
        rec.controls.pop_back();  // final row is padding
        rec.lambdas.pop_back();
    }
    return rec;
}

inline void write_convergence_csv(const std::string& path, const ConvergenceRecord& record) {
    std::ofstream out(path);
    if (!out) throw ValidationError("write_convergence_csv: cannot open " + path);
    out << "outer,inner,error,c,cond,last_row_norm,accepted\n";
    for (const ConvergenceRow& r : record) {
        out << r.outer << ',' << r.inner << ',' << detail::fmt17(r.error) << ','
            << detail::fmt17(r.c) << ',' << detail::fmt17(r.cond) << ','
            << detail::fmt17(r.last_row_norm) << ',' << (r.accepted ? 1 : 0) << "\n";
    }
}

}  // namespace pend3d

#endif  // PEND3D_IO_HPP
