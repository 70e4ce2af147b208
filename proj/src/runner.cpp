#include "profci/runner.hpp"

#include "profci/errors.hpp"

#include <cmath>

namespace profci {

namespace {

// Lenient scan used by the runner: malformed sentinel lines are treated as
// noise, not a reason to abort the sequence. The strict contract lives in
// parse_result_stream.
std::vector<TaskResult> scan_result_lines(const std::string& text) {
    std::vector<TaskResult> results;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        size_t end = (eol == std::string::npos) ? text.size() : eol;
        std::string_view line{text.data() + pos, end - pos};
        try {
            if (auto r = parse_result_line(line)) results.push_back(std::move(*r));
        } catch (const malformed_result_line&) {
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return results;
}

std::string describe_exit(int exit_status) {
    if (exit_status > 128)
        return "command was killed by signal " + std::to_string(exit_status - 128);
    return "command exited with status " + std::to_string(exit_status);
}

TaskResult synthesize_result(const TaskDef& task, TaskStatus status, std::string message) {
    TaskResult r;
    r.id = task.id;
    r.title = task.title;
    r.status = status;
    r.description = task.description;
    r.message = status == TaskStatus::pass ? "" : std::move(message);
    r.hints = task.hints;
    return r;
}

std::string format_timeout_seconds(std::chrono::duration<double> timeout) {
    double s = timeout.count();
    if (s == std::floor(s)) return std::to_string(static_cast<long long>(s));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", s);
    return buf;
}

} // namespace

std::string output_tail(const std::string& text, size_t max_lines, size_t max_bytes) {
    size_t pos = text.size();
    while (pos > 0 && text[pos - 1] == '\n') --pos; // ignore trailing newline
    size_t lines = 0;
    size_t start = pos;
    while (start > 0 && lines < max_lines) {
        size_t prev = text.rfind('\n', start - 1);
        if (prev == std::string::npos) {
            start = 0;
            break;
        }
        ++lines;
        start = prev;
        if (lines == max_lines) break;
    }
    if (start > 0 && text[start] == '\n') ++start;
    std::string tail = text.substr(start, pos - start);
    if (tail.size() > max_bytes) tail.erase(0, tail.size() - max_bytes);
    return tail;
}

SuiteRun run_student_suite(const std::filesystem::path& workspace,
                           const std::vector<std::string>& command,
                           std::chrono::duration<double> timeout) {
    if (command.empty()) throw spawn_failure("student suite command is empty");
    CommandResult res = run_command(command, workspace, timeout);
    if (res.timed_out)
        throw timeout_exceeded("student suite timed out after " +
                                   format_timeout_seconds(timeout) + " s",
                               res.output);
    return SuiteRun{res.exit_status, std::move(res.output), res.duration};
}

SequenceRun run_feature_sequence(const std::filesystem::path& workspace,
                                 const ExerciseManifest& manifest,
                                 std::chrono::duration<double> timeout_per_task) {
    SequenceRun run;
    for (size_t index = 0; index < manifest.tasks.size(); ++index) {
        const TaskDef& task = manifest.tasks[index];
        CommandResult res =
            run_command(task.command, workspace, timeout_per_task,
                        {{"PROFCI_TASK_ID", task.id}});

        TaskRunRecord record;
        record.task_id = task.id;
        record.exit_status = res.exit_status;
        record.raw_tail = output_tail(res.output);

        std::vector<TaskResult> parsed = scan_result_lines(res.output);
        const TaskResult* reported = nullptr;
        for (const TaskResult& r : parsed)
            if (r.id == task.id) reported = &r;

        bool failed;
        if (res.timed_out) {
            failed = true;
            record.result = synthesize_result(
                task, TaskStatus::fail,
                "timed out after " + format_timeout_seconds(timeout_per_task) + " s");
            record.synthesized = true;
        } else {
            // Exit status is authoritative; a reported result can only
            // turn an exit-zero run into a failure, never the reverse.
            failed = res.exit_status != 0 ||
                     (reported && reported->status != TaskStatus::pass);
            if (reported && (reported->status != TaskStatus::pass) == failed) {
                record.result = *reported;
            } else {
                std::string message = record.raw_tail.empty()
                                          ? describe_exit(res.exit_status)
                                          : record.raw_tail;
                record.result = synthesize_result(
                    task, failed ? TaskStatus::fail : TaskStatus::pass, std::move(message));
                record.synthesized = true;
            }
        }

        run.per_task.push_back(std::move(record));
        if (failed) {
            run.first_failure_index = index;
            break;
        }
    }
    run.executed_count = run.per_task.size();
    return run;
}

} // namespace profci
