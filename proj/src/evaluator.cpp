#include "profci/evaluator.hpp"

#include "profci/errors.hpp"
#include "profci/pathglob.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <regex>

namespace profci {

namespace fs = std::filesystem;

namespace {

std::string replace_all(std::string text, const std::string& needle, const std::string& with) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), with);
        pos += with.size();
    }
    return text;
}

uint64_t fnv1a(std::string_view data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string completion_body(const ExerciseManifest& manifest) {
    std::string body =
        replace_all(manifest.completion_body_template, "{survey_url}", manifest.survey_url);
    if (!manifest.survey_url.empty() && body.find(manifest.survey_url) == std::string::npos)
        body += "\n\nSurvey: " + manifest.survey_url;
    if (body.empty()) body = "You have completed the exercise.";
    return body;
}

} // namespace

std::string to_string(ForgeActionKind kind) {
    switch (kind) {
    case ForgeActionKind::create_issue: return "create_issue";
    case ForgeActionKind::comment_issue: return "comment_issue";
    case ForgeActionKind::create_completion_issue: return "create_completion_issue";
    }
    return "create_issue";
}

std::optional<ForgeActionKind> forge_action_kind_from_string(std::string_view s) {
    if (s == "create_issue") return ForgeActionKind::create_issue;
    if (s == "comment_issue") return ForgeActionKind::comment_issue;
    if (s == "create_completion_issue") return ForgeActionKind::create_completion_issue;
    return std::nullopt;
}

GateDecision test_growth_gate(long previous_test_census, long current_test_census, bool enabled) {
    if (!enabled || current_test_census > previous_test_census) return {};
    return {true,
            "Your test count did not grow since the last build (" +
                std::to_string(previous_test_census) + " before, " +
                std::to_string(current_test_census) +
                " now). Document the missing feature with a failing test first, "
                "then implement it."};
}

std::string idempotency_footer(const std::string& build_id, const std::string& title) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(title)));
    return "<!-- profci:" + build_id + ":" + hash + " -->";
}

std::string render_ticket_body(const TaskDef& task, const TaskResult& result) {
    std::string body;
    body += "**Given** " + result.description.given + "\n";
    body += "**When** " + result.description.when + "\n";
    body += "**Then** " + result.description.then + "\n";
    body += "\n```\n" + result.message + "\n```\n";
    if (!task.hints.empty()) {
        body += "\nHints:\n";
        for (const std::string& hint : task.hints) body += "- " + hint + "\n";
    }
    return body;
}

EvaluationOutcome evaluate_build(const SequenceRun& sequence, const ExerciseManifest& manifest,
                                 const std::set<std::string>& forge_state,
                                 const BuildMeta& build_meta, const EvaluateOptions& options) {
    EvaluationOutcome outcome;
    const size_t total = manifest.tasks.size();

    if (sequence.first_failure_index) {
        size_t index = *sequence.first_failure_index;
        outcome.score = static_cast<int>(index);
        const TaskRunRecord& record = sequence.per_task.at(index);
        outcome.first_failure = {record.task_id, record.result};
        outcome.completed = false;

        const TaskDef& task = manifest.tasks.at(index);
        if (!options.gate.hold) {
            ForgeAction action;
            action.title = task.title;
            action.kind = forge_state.contains(task.title) ? ForgeActionKind::comment_issue
                                                           : ForgeActionKind::create_issue;
            action.body = render_ticket_body(task, record.result) + "\n" +
                          idempotency_footer(build_meta.build_id, task.title);
            outcome.actions.push_back(std::move(action));
        }
    } else {
        outcome.score = static_cast<int>(total);
        outcome.completed = true;
        if (!forge_state.contains(options.completion_title)) {
            ForgeAction action;
            action.kind = ForgeActionKind::create_completion_issue;
            action.title = options.completion_title;
            action.body = completion_body(manifest) + "\n" +
                          idempotency_footer(build_meta.build_id, action.title);
            outcome.actions.push_back(std::move(action));
        }
    }

    outcome.event = ProgressEvent{build_meta.user, outcome.score, build_meta.now,
                                  build_meta.build_id, build_meta.commit_id};
    return outcome;
}

long census_student_tests(const fs::path& workspace, const std::string& file_glob,
                          const std::string& line_pattern) {
    std::regex file_re = glob_to_regex(file_glob);
    std::regex line_re;
    try {
        line_re = std::regex(line_pattern);
    } catch (const std::regex_error& e) {
        throw pattern_invalid(std::string("line pattern: ") + e.what());
    }

    if (!fs::exists(workspace)) return 0;

    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(
             workspace, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), workspace).generic_string();
        if (glob_match(file_re, rel)) files.push_back(it->path());
    }
    std::sort(files.begin(), files.end());

    long count = 0;
    for (const fs::path& file : files) {
        std::ifstream in(file);
        std::string line;
        while (std::getline(in, line))
            if (std::regex_search(line, line_re)) ++count;
    }
    return count;
}

} // namespace profci
