#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace cdrflow::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

/// Runs one command. `args` excludes the program name, so `args[0]` is the
/// subcommand. Never throws; failures become an exit code plus a message on
/// `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Derives the seed a pipeline stage uses from the user-facing `--seed`.
[[nodiscard]] std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) noexcept;

}  // namespace cdrflow::cli
