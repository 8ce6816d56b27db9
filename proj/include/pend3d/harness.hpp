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

#ifndef PEND3D_HARNESS_HPP
#define PEND3D_HARNESS_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "pend3d/cases.hpp"
#include "pend3d/io.hpp"
#include "pend3d/phase.hpp"

namespace pend3d {

using json = nlohmann::ordered_json;

enum class RunMode { simulate, solve, phase };

/// Fully resolved run request: a named case or explicit boundary data,
/// solver overrides, and output locations.
struct RunConfig {
    RunMode mode = RunMode::solve;
    std::string case_id;             // empty when boundary data is explicit
    ProblemSpec problem;
    SolverConfig solver;
    std::vector<Vec3> controls;      // simulate mode; padded with zeros
    std::string trajectory_path;     // phase mode input
    std::string out_dir = ".";
};

namespace detail {

inline Vec3 parse_vec3(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3) {
        throw ParseError("config: field '" + key + "' must be an array of 3 numbers");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Mat3 parse_mat3(const json& j, const std::string& key) {
    if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>())
            .asDiagonal();
    }
    if (j.is_array() && j.size() == 3 && j[0].is_array()) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
            if (j[r].size() != 3) {
                throw ParseError("config: field '" + key + "' must be 3x3 (or a 3-vector diagonal)");
            }
            for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
        }
        return m;
    }
    throw ParseError("config: field '" + key + "' must be 3x3 (or a 3-vector diagonal)");
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ParseError("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    detail::reject_unknown(j, {"mode", "case", "body", "g", "R0", "Pi0", "RNd", "PiNd",
                               "N", "h", "solver", "controls", "trajectory", "out"},
                           "top level");
    RunConfig cfg;

    const std::string mode = j.value("mode", "solve");
    if (mode == "simulate") cfg.mode = RunMode::simulate;
    else if (mode == "solve") cfg.mode = RunMode::solve;
    else if (mode == "phase") cfg.mode = RunMode::phase;
    else throw ParseError("config: mode must be simulate|solve|phase");

    const int N = j.value("N", 100);
    const double h = j.value("h", 0.01);
    const double g = j.value("g", 9.81);

    if (j.contains("case")) {
        cfg.case_id = j["case"].get<std::string>();
        cfg.problem = named_case(cfg.case_id, N, h, g);
    } else {
        cfg.problem.N = N;
        cfg.problem.h = h;
        cfg.problem.body = body_a(g);
    }
    if (j.contains("body")) {
        const json& b = j["body"];
        detail::reject_unknown(b, {"m", "g", "J", "rho"}, "body");
        cfg.problem.body = BodyParams::make(
            b.value("m", 1.0), b.value("g", g),
            b.contains("J") ? detail::parse_mat3(b["J"], "J") : Mat3(Mat3::Identity()),
            b.contains("rho") ? detail::parse_vec3(b["rho"], "rho") : Vec3::Zero());
    }
    if (j.contains("R0")) cfg.problem.R0 = RotationMatrix(detail::parse_mat3(j["R0"], "R0"));
    if (j.contains("Pi0")) cfg.problem.Pi0 = detail::parse_vec3(j["Pi0"], "Pi0");
    if (j.contains("RNd")) cfg.problem.RNd = RotationMatrix(detail::parse_mat3(j["RNd"], "RNd"));
    if (j.contains("PiNd")) cfg.problem.PiNd = detail::parse_vec3(j["PiNd"], "PiNd");

    if (j.contains("solver")) {
        const json& s = j["solver"];
        detail::reject_unknown(s,
                               {"eps_S", "alpha", "c_shrink", "max_outer", "max_backtracks",
                                "fd_eps", "seed", "init_scale",
                                "use_symmetry_decomposition"},
                               "solver");
        cfg.solver.eps_S = s.value("eps_S", cfg.solver.eps_S);
        cfg.solver.alpha = s.value("alpha", cfg.solver.alpha);
        cfg.solver.c_shrink = s.value("c_shrink", cfg.solver.c_shrink);
        cfg.solver.max_outer = s.value("max_outer", cfg.solver.max_outer);
        cfg.solver.max_backtracks = s.value("max_backtracks", cfg.solver.max_backtracks);
        cfg.solver.fd_eps = s.value("fd_eps", cfg.solver.fd_eps);
        cfg.solver.seed = s.value("seed", cfg.solver.seed);
        cfg.solver.init_scale = s.value("init_scale", cfg.solver.init_scale);
        cfg.solver.use_symmetry_decomposition =
            s.value("use_symmetry_decomposition", cfg.solver.use_symmetry_decomposition);
        if (!(cfg.solver.eps_S > 0.0) || !(cfg.solver.alpha > 0.0) ||
            cfg.solver.alpha >= 0.5 || !(cfg.solver.c_shrink > 0.0) ||
            cfg.solver.c_shrink >= 1.0 || !(cfg.solver.init_scale > 0.0)) {
            throw ValidationError("config: solver parameters out of range");
        }
    }
    if (j.contains("controls")) {
        for (const json& u : j["controls"]) {
            cfg.controls.push_back(detail::parse_vec3(u, "controls"));
        }
    }
    if (j.contains("trajectory")) cfg.trajectory_path = j["trajectory"].get<std::string>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

    if (cfg.mode == RunMode::solve) {
        try {
            cfg.problem.validate();
        } catch (const InfeasibleProblem& e) {
            throw ValidationError(std::string("config: ") + e.what());
        }
    }
    if (cfg.mode == RunMode::phase && cfg.trajectory_path.empty()) {
        throw ValidationError("config: phase mode requires a 'trajectory' path");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return parse_config(j);
}

namespace detail {

inline json body_json(const BodyParams& b) {
    json out;
    out["m"] = b.m;
    out["g"] = b.g;
    out["J"] = {{b.J(0, 0), b.J(0, 1), b.J(0, 2)},
                {b.J(1, 0), b.J(1, 1), b.J(1, 2)},
                {b.J(2, 0), b.J(2, 1), b.J(2, 2)}};
    out["rho"] = {b.rho(0), b.rho(1), b.rho(2)};
    return out;
}

inline double loop_phase(const std::vector<DiscreteState>& states, const Mat3& J,
                         bool* degenerate) {
    ReducedTrajectory loop;
    loop.gamma.reserve(states.size());
    for (const DiscreteState& s : states) {
        loop.gamma.push_back(s.R.mat().transpose() * kE3);
    }
    return surface_phase(loop, J, degenerate);
}

}  // namespace detail

/// Executes a run and writes trajectory/convergence CSVs and a summary
/// JSON into cfg.out_dir. Exit codes: 0 success, 2 iteration cap hit,
/// 3 validation failure, 4 numerical failure.
inline int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const std::string summary_path = (fs::path(cfg.out_dir) / "summary.json").string();

    json summary;
    summary["case"] = cfg.case_id.empty() ? json(nullptr) : json(cfg.case_id);
    summary["config"] = {{"mode", cfg.mode == RunMode::simulate  ? "simulate"
                                  : cfg.mode == RunMode::solve   ? "solve"
                                                                 : "phase"},
                         {"N", cfg.problem.N},
                         {"h", cfg.problem.h},
                         {"seed", cfg.solver.seed},
                         {"body", detail::body_json(cfg.problem.body)}};
    auto flush = [&](const char* status) {
        summary["status"] = status;
        std::ofstream out(summary_path);
        out << summary.dump(2) << "\n";
    };

    try {
        if (cfg.mode == RunMode::simulate) {
            std::vector<Vec3> controls = cfg.controls;
            controls.resize(cfg.problem.N, Vec3::Zero());
            const StateTrajectory traj =
                integrate(DiscreteState{cfg.problem.R0, cfg.problem.Pi0}, controls,
                          cfg.problem.body, cfg.problem.h);
            TrajectoryRecord rec{traj.h, traj.states, traj.controls, {}};
            write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(), rec,
                                 cfg.problem.body);
            summary["steps"] = cfg.problem.N;
            summary["pi3_initial"] = momentum_pi3(traj.states.front(), cfg.problem.body);
            summary["pi3_final"] = momentum_pi3(traj.states.back(), cfg.problem.body);
            summary["energy_initial"] = energy(traj.states.front(), cfg.problem.body);
            summary["energy_final"] = energy(traj.states.back(), cfg.problem.body);
            flush("ok");
            return 0;
        }

        if (cfg.mode == RunMode::phase) {
            const TrajectoryRecord rec = read_trajectory_csv(cfg.trajectory_path);
            bool degenerate = false;
            const double theta =
                detail::loop_phase(rec.states, cfg.problem.body.J, &degenerate);
            summary["theta_geo"] = theta;
            summary["degenerate_loop"] = degenerate;
            flush("ok");
            return 0;
        }

        // solve
        const Solution sol = solve(cfg.problem, cfg.solver);
        TrajectoryRecord rec{sol.trajectory.h, sol.trajectory.states, sol.trajectory.u,
                             sol.trajectory.lambda};
        write_trajectory_csv((fs::path(cfg.out_dir) / "trajectory.csv").string(), rec,
                             cfg.problem.body);
        write_convergence_csv((fs::path(cfg.out_dir) / "convergence.csv").string(),
                              sol.record);
        summary["converged"] = sol.converged;
        summary["performance_index"] = sol.performance_index;
        summary["terminal_attitude_norm"] = sol.attitude_norm;
        summary["terminal_momentum_norm"] = sol.momentum_norm;
        summary["outer_iterations"] = sol.outer_iterations;
        summary["total_iterations"] = sol.total_iterations;
        summary["cond_min"] = sol.cond_min;
        summary["cond_max"] = sol.cond_max;
        summary["last_row_norm_max"] = sol.last_row_norm_max;
        summary["lambda0"] = {sol.lambda0.lambda1(0), sol.lambda0.lambda1(1),
                              sol.lambda0.lambda1(2), sol.lambda0.lambda2(0),
                              sol.lambda0.lambda2(1), sol.lambda0.lambda2(2)};
        if (sol.converged) {
            bool degenerate = false;
            summary["theta_geo"] =
                detail::loop_phase(sol.trajectory.states, cfg.problem.body.J, &degenerate);
            summary["degenerate_loop"] = degenerate;
        }
        summary["wall_seconds"] = sol.wall_seconds;
        flush(sol.converged ? "ok" : "max_iterations");
        return sol.converged ? 0 : 2;
    } catch (const ValidationError&) {
        flush("validation_error");
        throw;
    } catch (const ParseError&) {
        flush("parse_error");
        throw;
    } catch (const InfeasibleProblem&) {
        flush("validation_error");
        throw;
    } catch (const std::exception&) {
        flush("numerical_error");
        throw;
    }
}

}  // namespace pend3d

#endif  // PEND3D_HARNESS_HPP
