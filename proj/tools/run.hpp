#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinlayer::cli {

enum class Command { verify_geometry, verify_identities, solve_surface, solve_layer, gamma_sweep, lebesgue_check };

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

std::optional<Command> parse_command(std::string_view name);
std::string_view command_name(Command command);
std::vector<std::string> command_names();

struct RunConfig {
    Command command = Command::verify_geometry;
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    unsigned long long seed = 42;
    /// Replaces the tolerance of the command's config section when set.
    std::optional<double> tol;
    /// Worker threads; 0 keeps the current setting.
    int jobs = 0;
};

/// Runs one command. Returns kExitPass, kExitCheckFailed or kExitConfigError;
/// a one-line summary goes to `out`, diagnostics to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Command-line front end: app <command> --config FILE --out DIR [--jobs N] [--seed S] [--tol X].
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace thinlayer::cli
