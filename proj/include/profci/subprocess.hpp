#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace profci {

inline constexpr std::size_t kOutputCap = 64 * 1024;
inline constexpr std::string_view kTruncationNotice = "[... earlier output truncated ...]\n";

struct CommandResult {
    int exit_status = 0; // WEXITSTATUS, or 128+signal when killed by one
    std::string output;  // stdout+stderr merged, at most kOutputCap bytes
    std::chrono::duration<double> duration{0};
    bool timed_out = false; // process hit the deadline and was killed
};

// Runs argv with the given working directory, capturing merged
// stdout/stderr bounded to kOutputCap (older output dropped from the
// front, marked with kTruncationNotice). The environment is passed
// through with extra_env entries added on top.
//
// A nonzero exit is a result, not an error. Throws spawn_failure when the
// command cannot be executed at all. On timeout the whole process group is
// killed and timed_out is set; throws timeout_exceeded only if the group
// cannot be killed.
CommandResult run_command(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir,
                          std::chrono::duration<double> timeout,
                          const std::vector<std::pair<std::string, std::string>>& extra_env = {});

} // namespace profci
