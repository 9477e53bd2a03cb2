#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "trajphase/cli/commands.hpp"
#include "trajphase/cli/csv.hpp"
#include "trajphase/ensemble.hpp"

namespace {

using namespace trajphase;

struct Args {
    std::string config;
    std::string preset;
    std::string out;
    std::string report;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    bool quiet = false;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed for " + path);
}

std::string compiler_version() {
#if defined(__clang__)
    return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    return std::string("gcc ") + __VERSION__;
#else
    return "unknown";
#endif
}

int run(const std::string& command, const Args& a) {
    const auto start = std::chrono::steady_clock::now();
    nlohmann::ordered_json report;
    report["command"] = command;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    int code = 0;
    std::string error;

    auto emit_report = [&] {
        const std::string path = !a.report.empty() ? a.report : (a.out.empty() ? "" : a.out + ".report.json");
        if (path.empty()) return;
        report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report["warnings"] = warnings;
        report["outputs"] = outputs;
        report["exit_code"] = code;
        if (!error.empty()) report["error"] = error;
        write_file(path, report.dump(2) + "\n");
    };

    cli::ScenarioConfig cfg;
    try {
        const std::string path = a.preset.empty() ? a.config : cli::preset_path(a.preset);
        report["config"] = path;
        cfg = cli::load_config(path);
        const std::string canonical = cli::serialize_config(cfg);
        report["config_digest"] = "fnv1a64:" + cli::fnv1a_hex(canonical);
        report["seed"] = a.seed.value_or(cfg.run.seed);
        report["steps"] = a.steps.value_or(cfg.run.steps);
        report["threads"] = resolve_thread_count(cfg.run.threads);
        report["versions"] = {
            {"trajphase", TRAJPHASE_VERSION},
            {"csv_schema", cli::kSchemaVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", compiler_version()},
        };

        cli::CommandOptions opts{a.seed, a.steps};
        const auto result = cli::run_command(command, cfg, opts);
        warnings = result.warnings;
        code = result.exit_code;
        for (const auto& file : result.files) {
            if (a.out.empty()) {
                std::cout << file.content;
                outputs.push_back(file.suffix.empty() ? "<stdout>" : "<stdout>" + file.suffix);
            } else {
                write_file(a.out + file.suffix, file.content);
                outputs.push_back(a.out + file.suffix);
            }
        }
        if (!a.quiet) {
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            std::cerr << result.message << "\n";
        }
    } catch (const cli::ConfigError& e) {
        code = 2;
        error = e.what();
    } catch (const InvalidArgument& e) {
        code = 2;
        error = e.what();
    } catch (const NumericError& e) {
        code = 1;
        error = e.what();
    } catch (const std::exception& e) {
        code = 1;
        error = e.what();
    }
    if (!error.empty()) std::cerr << "error: " << error << "\n";
    try {
        emit_report();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (code == 0) code = 1;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric phases of open-system trajectories"};
    app.set_version_flag("--version", std::string("trajphase ") + TRAJPHASE_VERSION);
    app.require_subcommand(1);

    Args args;
    std::string selected;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"evolve", "integrate the master equation and write rho(t)"},
        {"nojump-phase", "no-jump geometric phase, optionally swept over parameters"},
        {"jump-sample", "quantum-jump ensemble with a master-equation comparison"},
        {"qsd-phase", "averaged geometric phase from linear QSD trajectories"},
        {"symmetry-check", "is a shift of the Lindblad operators hidden?"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        auto* cfg_opt = sub->add_option("--config", args.config, "YAML scenario file")->check(CLI::ExistingFile);
        auto* preset_opt = sub->add_option("--preset", args.preset, "bundled scenario, e.g. fig1");
        cfg_opt->excludes(preset_opt);
        sub->add_option("--out", args.out, "primary output path (stdout if omitted)");
        sub->add_option("--report", args.report, "JSON run report path (default <out>.report.json)");
        sub->add_option("--seed", args.seed, "override run.seed");
        sub->add_option("--steps", args.steps, "override run.steps")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", args.quiet, "suppress the summary and warnings on stderr");
        sub->callback([&selected, name = name] { selected = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (args.config.empty() && args.preset.empty()) {
        std::cerr << "error: one of --config or --preset is required\n";
        return 2;
    }
    return run(selected, args);
}
