#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace profci {

// Sentinel prefix for machine-readable result lines. Anything else on
// stdout/stderr is test-framework noise and is skipped.
inline constexpr std::string_view kResultSentinel = "##PROFCI## ";

enum class TaskStatus { pass, fail, error };

std::string to_string(TaskStatus s);
std::optional<TaskStatus> task_status_from_string(std::string_view s);

// Natural-language test description: context, action, expected outcome.
struct GivenWhenThen {
    std::string given;
    std::string when;
    std::string then;

    bool operator==(const GivenWhenThen&) const = default;
};

struct TaskDef {
    std::string id;
    std::string title;
    GivenWhenThen description;
    std::vector<std::string> hints;
    std::vector<std::string> command;

    bool operator==(const TaskDef&) const = default;
};

// Outcome of one hidden feature test, either parsed from a result line or
// synthesized by the runner from the task definition plus captured output.
struct TaskResult {
    std::string id;
    std::string title;
    TaskStatus status = TaskStatus::fail;
    GivenWhenThen description;
    std::string message; // empty iff status == pass
    std::vector<std::string> hints;

    bool operator==(const TaskResult&) const = default;
};

struct ExerciseManifest {
    std::string exercise_name;
    std::vector<TaskDef> tasks; // list position is the task's order index
    std::vector<std::string> student_suite_command;
    std::string completion_body_template; // may contain {survey_url}
    std::string survey_url;
    std::string report_endpoint; // empty = no reporting configured

    bool operator==(const ExerciseManifest&) const = default;
};

// Parses and validates one UTF-8 JSON manifest document.
// Throws malformed_document if the text is not JSON, schema_violation
// (naming the offending path) if any invariant fails. Unknown fields are
// ignored for forward compatibility.
ExerciseManifest parse_manifest(const std::string& document);

// Inverse of parse_manifest; the output parses back to an equal manifest.
std::string serialize_manifest(const ExerciseManifest& manifest);

// Parses one line. Returns nullopt when the line does not start with the
// sentinel; throws malformed_result_line when it does but the payload is
// not a valid result object. line_number is used for the error only.
std::optional<TaskResult> parse_result_line(std::string_view line, int line_number = 0);

// Scans a whole captured stream. Non-sentinel lines are skipped silently;
// a sentinel line with a bad payload raises malformed_result_line.
std::vector<TaskResult> parse_result_stream(const std::string& text);

// Renders the interchange line for a result, "\n" terminated.
std::string format_result_line(const TaskResult& result);

} // namespace profci
