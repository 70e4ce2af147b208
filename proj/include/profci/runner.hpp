#pragma once

#include "profci/model.hpp"
#include "profci/subprocess.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace profci {

inline constexpr std::chrono::seconds kDefaultTaskTimeout{300};

// One run of the student's own test suite.
struct SuiteRun {
    int exit_status = 0;
    std::string captured_output;
    std::chrono::duration<double> duration{0};
};

// One executed hidden task. `result` is taken from the last conforming
// result line whose id matches the task, otherwise synthesized from the
// task definition plus the tail of the captured output.
struct TaskRunRecord {
    std::string task_id;
    int exit_status = 0;
    TaskResult result;
    bool synthesized = false;
    std::string raw_tail; // last lines of captured output
};

struct SequenceRun {
    std::vector<TaskRunRecord> per_task;  // executed tasks, in order
    std::optional<size_t> first_failure_index;
    size_t executed_count = 0;
};

// Runs the student suite with the workspace as working directory. A
// nonzero exit is a result; spawn_failure and timeout_exceeded are thrown.
SuiteRun run_student_suite(const std::filesystem::path& workspace,
                           const std::vector<std::string>& command,
                           std::chrono::duration<double> timeout = kDefaultTaskTimeout);

// Runs the hidden feature tests in manifest order, stopping after the
// first task whose command exits nonzero or whose parsed result says
// fail/error. A per-task timeout counts as a task failure with message
// "timed out after N s". Each task runs with PROFCI_TASK_ID set to its id.
SequenceRun run_feature_sequence(const std::filesystem::path& workspace,
                                 const ExerciseManifest& manifest,
                                 std::chrono::duration<double> timeout_per_task = kDefaultTaskTimeout);

// Last `max_lines` lines of text, capped to `max_bytes` (suffix kept).
std::string output_tail(const std::string& text, size_t max_lines = 20,
                        size_t max_bytes = 4000);

} // namespace profci
