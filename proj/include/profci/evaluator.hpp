#pragma once

#include "profci/model.hpp"
#include "profci/runner.hpp"
#include "profci/timeutil.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace profci {

inline constexpr std::string_view kDefaultCompletionTitle = "\xF0\x9F\x8E\x89 Exercise complete";

enum class ForgeActionKind { create_issue, comment_issue, create_completion_issue };

std::string to_string(ForgeActionKind kind);
std::optional<ForgeActionKind> forge_action_kind_from_string(std::string_view s);

struct ForgeAction {
    ForgeActionKind kind = ForgeActionKind::create_issue;
    std::string title;
    std::string body; // non-empty; ends with the idempotency footer

    bool operator==(const ForgeAction&) const = default;
};

struct ProgressEvent {
    std::string user;
    int score = 0;
    Timestamp timestamp{};
    std::string build_id;
    std::string commit_id;

    bool operator==(const ProgressEvent&) const = default;
};

struct BuildMeta {
    std::string user;
    std::string build_id;
    std::string commit_id;
    Timestamp now{};
};

struct EvaluationOutcome {
    int score = 0; // consecutively passing hidden tests from index 0
    std::optional<std::pair<std::string, TaskResult>> first_failure; // (task id, result)
    bool completed = false;
    std::vector<ForgeAction> actions; // at most one
    ProgressEvent event;
};

// Optional test-first rule: hold the next ticket until the student's own
// test census grew.
struct GateDecision {
    bool hold = false;
    std::string message;
};

GateDecision test_growth_gate(long previous_test_census, long current_test_census, bool enabled);

struct EvaluateOptions {
    GateDecision gate;                      // default: advance
    std::string completion_title{kDefaultCompletionTitle};
};

// Pure planning step: score, ticket action and progress event for one
// build. forge_state is the set of currently open issue titles.
EvaluationOutcome evaluate_build(const SequenceRun& sequence, const ExerciseManifest& manifest,
                                 const std::set<std::string>& forge_state,
                                 const BuildMeta& build_meta,
                                 const EvaluateOptions& options = {});

// Ticket body: Given/When/Then as labeled lines, the error message in a
// fenced block, then the hint list when hints exist. Byte-stable.
std::string render_ticket_body(const TaskDef& task, const TaskResult& result);

// Footer that makes forge actions idempotent across CI retries.
std::string idempotency_footer(const std::string& build_id, const std::string& title);

// Counts student-authored test declarations: lines matching line_pattern
// in files matching file_glob (relative to workspace).
long census_student_tests(const std::filesystem::path& workspace, const std::string& file_glob,
                          const std::string& line_pattern);

} // namespace profci
