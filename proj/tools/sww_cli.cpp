// Command-line front end: solve, verify or measure from a JSON config plus flag overrides.
#include "sww/cli.hpp"
#include "sww/verify.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <optional>

int main(int argc, char** argv)
{
    CLI::App app{"Standing gravity-capillary water waves: solver, verification suites and measure estimate"};
    std::string config_path, mode = "solve", suite = "all";
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<unsigned long long> seed;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "What to run")->check(CLI::IsMember({"solve", "verify", "measure"}));
    app.add_option("--suite", suite, "Verification suite (verify mode)");
    app.add_option("--out", out, "Output directory");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Random seed");
    CLI11_PARSE(app, argc, argv);

    try {
        sww::RunConfig cfg = config_path.empty() ? sww::RunConfig{} : sww::load_config(config_path);
        // Precedence: flag, then environment, then config file.
        if (const char* e = std::getenv("SWW_OUT")) cfg.out = e;
        if (const char* e = std::getenv("SWW_THREADS")) cfg.threads = std::atoi(e);
        if (out) cfg.out = *out;
        if (threads) cfg.threads = *threads;
        if (seed) cfg.seed = *seed;
        cfg.validate();

        if (mode == "solve") return sww::cmd_solve(cfg);
        if (mode == "measure") return sww::cmd_measure(cfg);
        return sww::cmd_verify(cfg, suite);
    } catch (const sww::ConfigError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        if (mode == "verify") {
            std::string names;
            for (const auto& s : sww::suite_names()) names += (names.empty() ? "" : ", ") + s;
            fmt::print(stderr, "suites: {}\n", names);
        }
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
