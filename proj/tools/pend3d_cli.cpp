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

#include <cstdlib>
#include <future>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"

#include "pend3d/harness.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string case_ids;
    int seed = -1;
};

std::vector<std::string> split_cases(const std::string& ids) {
    std::vector<std::string> out;
    std::stringstream ss(ids);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

pend3d::RunConfig resolve(const CliArgs& args, pend3d::RunMode mode,
                          const std::string& case_id) {
    pend3d::RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = pend3d::load_config(args.config_path);
    }
    cfg.mode = mode;
    if (!case_id.empty()) {
        cfg.case_id = case_id;
        cfg.problem = pend3d::named_case(case_id, cfg.problem.N, cfg.problem.h,
                                         cfg.problem.body.g);
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed >= 0) cfg.solver.seed = static_cast<unsigned>(args.seed);
    return cfg;
}

int run_one(const pend3d::RunConfig& cfg) {
    try {
        return pend3d::run(cfg);
    } catch (const pend3d::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const pend3d::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const pend3d::InfeasibleProblem& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
}

int run_mode(const CliArgs& args, pend3d::RunMode mode) {
    const std::vector<std::string> ids = split_cases(args.case_ids);
    if (ids.size() <= 1) {
        try {
            return run_one(resolve(args, mode, ids.empty() ? "" : ids[0]));
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        }
    }

    // Batch: one output subdirectory per case, concurrency capped by
    // PEND3D_MAX_CONCURRENT_CASES (default: unbounded).
    std::size_t cap = ids.size();
    if (const char* env = std::getenv("PEND3D_MAX_CONCURRENT_CASES")) {
        cap = std::max<std::size_t>(1, std::strtoul(env, nullptr, 10));
    }
    int worst = 0;
    std::vector<std::pair<std::string, std::future<int>>> pending;
    auto drain = [&](std::size_t keep) {
        while (pending.size() > keep) {
            const int code = pending.front().second.get();
            std::cerr << "case " << pending.front().first << ": exit " << code << "\n";
            worst = std::max(worst, code);
            pending.erase(pending.begin());
        }
    };
    for (const std::string& id : ids) {
        pend3d::RunConfig cfg;
        try {
            cfg = resolve(args, mode, id);
        } catch (const std::exception& e) {
            std::cerr << "case " << id << ": " << e.what() << "\n";
            worst = std::max(worst, 3);
            continue;
        }
        cfg.out_dir = (std::filesystem::path(cfg.out_dir) / id).string();
        pending.emplace_back(id, std::async(std::launch::async, run_one, cfg));
        drain(cap - 1);
    }
    drain(0);
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled 3D pendulum on SO(3): variational integration, "
                 "minimum-effort maneuver solves, geometric phase"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON run configuration");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--seed", args.seed, "multiplier initialization seed");
        sub->add_option("--case", args.case_ids,
                        "named case id (i|ii|iii|iv), comma-separated for a batch");
    };
    CLI::App* sim = app.add_subcommand("simulate", "integrate the discrete flow");
    CLI::App* slv = app.add_subcommand("solve", "solve a minimum-effort maneuver");
    CLI::App* phs = app.add_subcommand("phase", "geometric phase of a stored trajectory");
    add_common(sim);
    add_common(slv);
    add_common(phs);

    CLI11_PARSE(app, argc, argv);

    pend3d::RunMode mode = pend3d::RunMode::solve;
    if (sim->parsed()) mode = pend3d::RunMode::simulate;
    if (phs->parsed()) mode = pend3d::RunMode::phase;
    return run_mode(args, mode);
}
