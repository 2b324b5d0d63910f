// sqsieve: run a verification sweep from a config file.
//
//   sqsieve --config configs/thm3.toml --seed 7 --out thm3.csv
//   sqsieve gauss-verify --out gauss.json --format json
//
// Exit status: 0 all checks passed, 1 a mathematical check failed, 2 malformed config or
// arguments, 3 I/O failure, 4 instance refused by the size guard.

#include "experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    using namespace sqsieve::cli;

    CLI::App app{"Exponential sums with modular square roots and the square-moduli large sieve: verification sweeps"};
    std::string config_path;
    std::string command;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    unsigned threads = 0;
    bool list = false;

    app.add_option("command", command, "Experiment to run (overrides the config's 'command')");
    app.add_option("--config", config_path, "Config file (TOML subset)");
    auto* seed_opt = app.add_option("--seed", seed, "PRNG seed (64-bit)");
    auto* out_opt = app.add_option("--out", out, "Report path; omitted means no report file");
    auto* format_opt = app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: logical cores)")->check(CLI::PositiveNumber);
    app.add_flag("--list", list, "List commands and the operations each one exercises");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    if (list) {
        for (const auto& [name, ops] : command_coverage()) {
            std::cout << name << ":";
            for (const auto& op : ops)
                std::cout << ' ' << op;
            std::cout << '\n';
        }
        return kExitOk;
    }

    ExperimentConfig cfg;
    try {
        ConfigFile file;
        if (!config_path.empty()) {
            file = load_config(config_path);
        } else {
            std::istringstream empty;
            file = parse_config(empty, "<defaults>");
        }
        cfg = make_config(std::move(file), command.empty() ? std::nullopt : std::optional(command),
                          *seed_opt ? std::optional(seed) : std::nullopt, *out_opt ? std::optional(out) : std::nullopt,
                          *format_opt ? std::optional(format) : std::nullopt,
                          *threads_opt ? std::optional(threads) : std::nullopt);
    } catch (const sqsieve::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    const RunResult result = run(cfg);
    (result.exit_code == kExitOk || result.exit_code == kExitMathFailure ? std::cout : std::cerr) << result.message << '\n';
    return result.exit_code;
}
