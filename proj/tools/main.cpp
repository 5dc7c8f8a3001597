#include <CLI11.hpp>

#include "hadeq/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"equilibrium problems on Hadamard manifolds: proximal solver and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const std::vector<std::string> tasks = {"solve",        "properties", "existence",
                                            "conditioning", "trap",       "geometry-test"};
    for (const auto& t : tasks) {
        CLI::App* sub = app.add_subcommand(t);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)")
            ->each([&seed_given](const std::string&) { seed_given = true; });
    }

    CLI11_PARSE(app, argc, argv);

    const std::string task = app.get_subcommands().front()->get_name();
    try {
        hadeq::cli::ExperimentConfig cfg = hadeq::cli::ExperimentConfig::from_file(config_path);
        if (!cfg.task.empty() && cfg.task != task) {
            std::fprintf(stderr, "config task '%s' does not match subcommand '%s'\n",
                         cfg.task.c_str(), task.c_str());
            return 1;
        }
        cfg.task = task;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_given) cfg.seed = seed;
        return hadeq::cli::run(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
