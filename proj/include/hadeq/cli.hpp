#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "hadeq/bifunction.hpp"

namespace hadeq::cli {

/// One experiment: a problem, a task, and the knobs the task needs.
/// Single config file per run; only seed and output directory may be
/// overridden from the command line.
struct ExperimentConfig {
    std::string task;  // solve | properties | existence | conditioning | trap | geometry-test
    nlohmann::json problem;   // {"catalog": name, ...parameters}
    nlohmann::json solver;    // lambda / schedule, inner method, tolerances, x0
    nlohmann::json grid;      // optional oracle/stop grid
    nlohmann::json existence; // optional task-specific knobs
    nlohmann::json trap;      // optional task-specific knobs
    nlohmann::json geometry;  // optional task-specific knobs
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

/// Bifunction named by a problem spec (catalog entry plus parameters).
Bifunction build_problem(const nlohmann::json& problem);

/// Runs the configured task, writes artifacts under out_dir, prints a
/// summary to stdout. Exit codes: 0 success, 2 a checker found a
/// counterexample (witness in the report), 1 error.
int run(const ExperimentConfig& config);

}  // namespace hadeq::cli
