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

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pend3d/harness.hpp"
#include "pend3d/phase.hpp"

using namespace pend3d;
namespace fs = std::filesystem;

namespace {

ReducedTrajectory circle_about_e3(double r, int n) {
    ReducedTrajectory loop;
    for (int i = 0; i <= n; ++i) {
        const double phi = 2.0 * M_PI * static_cast<double>(i) / n;
        loop.gamma.push_back(
            Vec3(std::sin(r) * std::cos(phi), std::sin(r) * std::sin(phi), std::cos(r)));
    }
    return loop;
}

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pend3d_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("phase integrand") {
    const Mat3 Ja = Vec3(0.13, 0.28, 0.17).asDiagonal();
    const Mat3 Jb = Vec3(0.22, 0.23, 0.03).asDiagonal();
    CHECK(phase_integrand(Vec3(0, 0, 1), Ja) ==
          Catch::Approx(-1.4117647058823531).epsilon(1e-14));
    CHECK(phase_integrand(Vec3(0, 0, 1), Jb) == Catch::Approx(-14.0).epsilon(1e-13));
    CHECK(phase_integrand(Vec3(1, 0, 0), Ja) ==
          Catch::Approx(-2.4615384615384617).epsilon(1e-14));
}

TEST_CASE("surface phase") {
    const Mat3 Ja = Vec3(0.13, 0.28, 0.17).asDiagonal();

    SECTION("small circle matches integrand times enclosed area") {
        const double r = 0.01;
        const ReducedTrajectory loop = circle_about_e3(r, 256);
        const double area = 2.0 * M_PI * (1.0 - std::cos(r));
        const double expected = phase_integrand(Vec3(0, 0, 1), Ja) * area;
        const double theta = surface_phase(loop, Ja);
        CHECK(theta == Catch::Approx(expected).epsilon(0.01));
    }

    SECTION("axisymmetric cap agrees with a radial quadrature oracle") {
        // For an inertia symmetric about e3 the integrand depends only on
        // the polar angle, so the cap integral reduces to one dimension.
        const Mat3 Jsym = Vec3(0.13, 0.13, 0.17).asDiagonal();
        const double r = 0.5;
        auto f = [&](double t) {
            return phase_integrand(Vec3(std::sin(t), 0, std::cos(t)), Jsym) *
                   2.0 * M_PI * std::sin(t);
        };
        double ref = 0.0;  // composite Simpson
        const int n = 2000;
        for (int i = 0; i < n; ++i) {
            const double a = r * i / n, b = r * (i + 1) / n;
            ref += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        }
        const double theta = surface_phase(circle_about_e3(r, 512), Jsym, nullptr, 1e-8);
        CHECK(theta == Catch::Approx(ref).epsilon(1e-4));
    }

    SECTION("reversing the loop flips the sign") {
        ReducedTrajectory loop = circle_about_e3(0.3, 128);
        ReducedTrajectory rev = loop;
        std::reverse(rev.gamma.begin(), rev.gamma.end());
        CHECK(surface_phase(rev, Ja) ==
              Catch::Approx(-surface_phase(loop, Ja)).epsilon(1e-8));
    }

    SECTION("zero-area excursion is degenerate") {
        ReducedTrajectory loop;
        for (int i = 0; i <= 50; ++i) {
            loop.gamma.push_back(exp_so3(Vec3(0.4 * i / 50.0, 0, 0)).mat().transpose() *
                                 kE3);
        }
        for (int i = 49; i >= 0; --i) loop.gamma.push_back(loop.gamma[i]);
        bool degenerate = false;
        CHECK(surface_phase(loop, Ja, &degenerate) == 0.0);
        CHECK(degenerate);
    }

    SECTION("open loops are rejected") {
        ReducedTrajectory open;
        open.gamma = {Vec3(0, 0, 1), Vec3(0, 1, 0), Vec3(1, 0, 0)};
        CHECK_THROWS_AS(surface_phase(open, Ja), OpenLoop);
    }
}

TEST_CASE("yaw between attitudes") {
    CHECK(yaw_between(RotationMatrix::identity(), exp_so3(Vec3(0, 0, 0.7))) ==
          Catch::Approx(0.7).epsilon(1e-14));
    const RotationMatrix R0 = exp_so3(Vec3(0.1, -0.3, 0.2));
    CHECK(yaw_between(R0, exp_so3(Vec3(0, 0, -1.1)) * R0) ==
          Catch::Approx(-1.1).epsilon(1e-12));
    CHECK_THROWS_AS(yaw_between(RotationMatrix::identity(), exp_so3(Vec3(0.1, 0, 0))),
                    NotVerticalRelation);
}

TEST_CASE("trajectory csv round trip") {
    const BodyParams body = body_a();
    const fs::path dir = temp_dir("csv");
    const std::string path = (dir / "traj.csv").string();

    const StateTrajectory traj = integrate(
        DiscreteState{exp_so3(Vec3(0.2, 0.1, -0.3)), Vec3(0.05, -0.02, 0.04)},
        std::vector<Vec3>(25, Vec3(0.1, 0.2, -0.1)), body, 0.01);
    TrajectoryRecord rec;
    rec.h = traj.h;
    rec.states = traj.states;
    rec.controls = traj.controls;
    rec.lambdas.assign(traj.controls.size(), Costate{});

    write_trajectory_csv(path, rec, body);
    const TrajectoryRecord back = read_trajectory_csv(path);

    REQUIRE(back.states.size() == rec.states.size());
    CHECK(back.h == rec.h);
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        CHECK((back.states[k].R.mat() - rec.states[k].R.mat()).norm() == 0.0);
        CHECK((back.states[k].Pi - rec.states[k].Pi).norm() == 0.0);
    }
    for (std::size_t k = 0; k < rec.controls.size(); ++k) {
        CHECK((back.controls[k] - rec.controls[k]).norm() == 0.0);
    }

    SECTION("tampered header is rejected") {
        std::ofstream out(path);
        out << "k,t,bogus\n0,0,1\n";
        out.close();
        CHECK_THROWS_AS(read_trajectory_csv(path), ParseError);
    }
}

TEST_CASE("config parsing") {
    SECTION("named case expansion") {
        const RunConfig cfg = parse_config(json::parse(R"({"case": "i"})"));
        CHECK(cfg.problem.N == 100);
        CHECK(cfg.problem.h == 0.01);
        CHECK((cfg.problem.R0.mat() - Mat3::Identity()).norm() == 0.0);
        CHECK((cfg.problem.RNd.mat() - exp_so3(Vec3(0, 0, M_PI / 2)).mat()).norm() <
              1e-15);
        CHECK(cfg.problem.body.J(0, 0) == 0.13);
    }

    SECTION("body B cases") {
        const RunConfig cfg = parse_config(json::parse(R"({"case": "iv"})"));
        CHECK(cfg.problem.body.J(2, 2) == 0.03);
        CHECK(cfg.problem.body.rho(2) == 0.4);
        CHECK((cfg.problem.RNd.mat() - Mat3(Vec3(-1, -1, 1).asDiagonal())).norm() <
              1e-15);
    }

    SECTION("overrides win over case defaults") {
        const RunConfig cfg =
            parse_config(json::parse(R"({"case": "i", "N": 40, "h": 0.02,
                                         "solver": {"seed": 9, "init_scale": 0.5}})"));
        CHECK(cfg.problem.N == 40);
        CHECK(cfg.problem.h == 0.02);
        CHECK(cfg.solver.seed == 9);
        CHECK(cfg.solver.init_scale == 0.5);
    }

    SECTION("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"case": "i", "stepsize": 0.1})")),
                        ParseError);
        CHECK_THROWS_AS(
            parse_config(json::parse(R"({"case": "i", "solver": {"Seed": 1}})")),
            ParseError);
    }

    SECTION("infeasible boundary momentum is rejected") {
        CHECK_THROWS_AS(
            parse_config(json::parse(R"({"case": "i", "Pi0": [0, 0, 1]})")),
            ValidationError);
    }

    SECTION("solver ranges are validated") {
        CHECK_THROWS_AS(
            parse_config(json::parse(R"({"case": "i", "solver": {"alpha": 0.7}})")),
            ValidationError);
    }
}

TEST_CASE("harness runs") {
    SECTION("simulate then phase, in-process") {
        const fs::path dir = temp_dir("run_sim");
        json j;
        j["mode"] = "solve";
        j["case"] = "i";
        j["out"] = dir.string();
        RunConfig cfg = parse_config(j);
        REQUIRE(run(cfg) == 0);
        REQUIRE(fs::exists(dir / "trajectory.csv"));
        REQUIRE(fs::exists(dir / "convergence.csv"));
        REQUIRE(fs::exists(dir / "summary.json"));

        std::ifstream in(dir / "summary.json");
        const json summary = json::parse(in);
        CHECK(summary["status"] == "ok");
        CHECK(summary["converged"] == true);
        CHECK(summary["theta_geo"].get<double>() ==
              Catch::Approx(M_PI / 2).margin(1e-2));

        // phase mode on the written trajectory reproduces the solve-time value
        const fs::path dir2 = temp_dir("run_phase");
        json p;
        p["mode"] = "phase";
        p["case"] = "i";
        p["trajectory"] = (dir / "trajectory.csv").string();
        p["out"] = dir2.string();
        REQUIRE(run(parse_config(p)) == 0);
        std::ifstream in2(dir2 / "summary.json");
        const json s2 = json::parse(in2);
        CHECK(std::abs(s2["theta_geo"].get<double>() -
                       summary["theta_geo"].get<double>()) <= 1e-12);
    }

    SECTION("summaries are reproducible apart from timing") {
        auto one = [](const std::string& name) {
            const fs::path dir = temp_dir(name);
            json j;
            j["mode"] = "solve";
            j["case"] = "i";
            j["solver"] = {{"seed", 2}};
            j["out"] = dir.string();
            run(parse_config(j));
            std::ifstream in(dir / "summary.json");
            json s = json::parse(in);
            s.erase("wall_seconds");
            return s.dump();
        };
        CHECK(one("repro_a") == one("repro_b"));
    }
}

#ifdef PEND3D_CLI_PATH
TEST_CASE("command line interface") {
    const std::string cli = PEND3D_CLI_PATH;
    const fs::path dir = temp_dir("cli");

    SECTION("solve subcommand with a case library entry") {
        const std::string cmd =
            cli + " solve --case i --out " + (dir / "solve").string() + " --seed 1";
        CHECK(std::system(cmd.c_str()) == 0);
        CHECK(fs::exists(dir / "solve" / "summary.json"));
    }

    SECTION("batch of cases writes one subdirectory each") {
        const std::string cmd = "PEND3D_MAX_CONCURRENT_CASES=1 " + cli +
                                " solve --case i,ii --out " + (dir / "batch").string();
        CHECK(std::system(cmd.c_str()) == 0);
        CHECK(fs::exists(dir / "batch" / "i" / "summary.json"));
        CHECK(fs::exists(dir / "batch" / "ii" / "summary.json"));
    }

    SECTION("invalid config exits with the validation code") {
        const fs::path bad = dir / "bad.json";
        std::ofstream(bad) << R"({"case": "i", "bogus": 1})";
        const std::string cmd = cli + " solve --config " + bad.string() + " --out " +
                                (dir / "bad_out").string();
        const int rc = std::system(cmd.c_str());
        CHECK(WEXITSTATUS(rc) == 3);
    }
}
#endif
