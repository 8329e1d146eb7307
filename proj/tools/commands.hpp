#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mbsense::cli {

inline constexpr const char* kToolVersion = "mbsense 0.1.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigInvalid = 2,
    kBudgetExhausted = 3,
    kInfeasible = 4,
};

struct CommandOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool with_map = false;
};

const std::vector<std::string>& command_names();

// Runs one subcommand, writes its artifacts under out_dir and returns the exit code.
// Errors are reported on stderr.
int run_command(const std::string& name, const CommandOptions& opt);

}  // namespace mbsense::cli
