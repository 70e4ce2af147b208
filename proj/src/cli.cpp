#include "profci/cli.hpp"

#include "profci/errors.hpp"
#include "profci/evaluator.hpp"
#include "profci/event_service.hpp"
#include "profci/forge.hpp"
#include "profci/model.hpp"
#include "profci/render.hpp"
#include "profci/reporting.hpp"
#include "profci/runner.hpp"
#include "profci/simulator.hpp"
#include "profci/timeutil.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace profci {

namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback = {}) {
    const char* value = std::getenv(name);
    return value && *value ? value : fallback;
}

RetryPolicy retry_policy() {
    RetryPolicy policy;
    // Ops tuning knob; tests shrink it so unreachable-endpoint paths stay fast.
    std::string base = env_or("PROFCI_RETRY_BASE_MS");
    if (!base.empty()) {
        try {
            policy.backoff_base = std::chrono::milliseconds{std::max(0L, std::stol(base))};
        } catch (const std::exception&) {
            throw config_invalid("PROFCI_RETRY_BASE_MS must be an integer");
        }
    }
    return policy;
}

std::string read_text_file(const fs::path& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw storage_failure("cannot read " + what + " " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << content;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw storage_failure("cannot write " + out_path);
    file << content;
    file.flush();
    if (!file) throw storage_failure("write to " + out_path + " failed");
}

// The manifest source is secret; diagnostics must name the variable, never
// the value, so none of these messages embed the URL or path.
std::string fetch_manifest_text(const std::string& source, const RetryPolicy& retry) {
    const bool is_http = source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0;
    if (!is_http) {
        std::string path = source.rfind("file://", 0) == 0 ? source.substr(7) : source;
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw config_invalid(
                "cannot read the exercise manifest (check PROFCI_TASKS_URL)");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }

    size_t scheme = source.find("://");
    size_t path_at = source.find('/', scheme + 3);
    std::string origin = path_at == std::string::npos ? source : source.substr(0, path_at);
    std::string path = path_at == std::string::npos ? "/" : source.substr(path_at);

    httplib::Client client(origin);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);

    int attempt = 0;
    for (;;) {
        httplib::Result res = client.Get(path);
        if (res) {
            if (res->status == 200) return res->body;
            if (res->status == 401 || res->status == 403)
                throw auth_rejected("tasks service: HTTP " + std::to_string(res->status));
            if (res->status < 500)
                throw config_invalid("tasks service answered HTTP " +
                                     std::to_string(res->status) +
                                     " (check PROFCI_TASKS_URL)");
        }
        if (attempt >= retry.max_retries)
            throw forge_unavailable(
                res ? "tasks service answered HTTP " + std::to_string(res->status)
                    : "tasks service: connection failed");
        std::this_thread::sleep_for(retry.backoff_base * (1 << attempt));
        ++attempt;
    }
}

EventLog load_events_file(const std::string& path) {
    return EventLog::load(fs::path(path));
}

std::map<std::string, std::vector<Timestamp>> builds_from_events(const EventLog& log) {
    std::map<std::string, std::vector<Timestamp>> builds;
    for (const std::string& user : log.users()) {
        std::vector<Timestamp> stamps;
        for (const auto& [ts, score] : log.progress_series(user)) stamps.push_back(ts);
        stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());
        builds[user] = std::move(stamps);
    }
    return builds;
}

std::vector<std::string> numbered_task_ids(int count) {
    const int width = count >= 100 ? 3 : 2;
    std::vector<std::string> ids;
    ids.reserve(static_cast<size_t>(std::max(count, 0)));
    for (int k = 1; k <= count; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "task-%0*d", width, k);
        ids.emplace_back(buf);
    }
    return ids;
}

int max_score(const EventLog& log) {
    int best = 0;
    for (const ProgressEvent& e : log.events()) best = std::max(best, e.score);
    return best;
}

ReportFormat parse_format(const std::string& text) {
    auto format = report_format_from_string(text);
    if (!format) throw config_invalid("unknown report format \"" + text + "\"");
    return *format;
}

// Without a manifest or explicit count, the best guess is that the top
// score seen means completion, so there are that many tasks. Only the
// very front of a class can be misjudged this way (their current task is
// still unscored); educators pass --manifest or --tasks for exactness.
std::vector<std::string> task_ids_for_report(const std::string& manifest_path, int task_count,
                                             const EventLog& log) {
    if (!manifest_path.empty()) {
        ExerciseManifest manifest =
            parse_manifest(read_text_file(manifest_path, "manifest"));
        std::vector<std::string> ids;
        for (const TaskDef& task : manifest.tasks) ids.push_back(task.id);
        return ids;
    }
    if (task_count > 0) return numbered_task_ids(task_count);
    return numbered_task_ids(std::max(1, max_score(log)));
}

// --- evaluate ---

struct EvaluateArgs {
    std::string workspace = ".";
    std::string user;
    std::string build_id;
    std::string commit_id;
    std::string forge_url;
    std::string repo;
    bool gate = false;
    std::string census_file;
    std::string census_glob = "test/**/*";
    std::string census_pattern = R"(\btest\b)";
    double timeout_s = 300.0;
    std::string completion_title{kDefaultCompletionTitle};
    std::string events_file;
    std::string report_url;
};

long read_census_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return -1; // first gated build: nothing to compare against
    long value = -1;
    in >> value;
    return in ? value : -1;
}

void write_census_file(const std::string& path, long value) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw storage_failure("cannot write census file " + path);
    out << value << "\n";
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
    const std::string tasks_url = env_or("PROFCI_TASKS_URL");
    if (tasks_url.empty()) {
        err << "PROFCI_TASKS_URL is not set; it must point at the hidden exercise manifest\n";
        return 2;
    }
    if (args.forge_url.empty() || args.repo.empty()) {
        err << "--forge-url and --repo are required to apply ticket actions\n";
        return 2;
    }
    if (args.gate && args.census_file.empty()) {
        err << "--gate needs --census-file to remember the previous test census\n";
        return 2;
    }

    const RetryPolicy retry = retry_policy();
    ExerciseManifest manifest = parse_manifest(fetch_manifest_text(tasks_url, retry));
    const auto timeout = std::chrono::duration<double>(args.timeout_s);

    SuiteRun suite;
    try {
        suite = run_student_suite(args.workspace, manifest.student_suite_command, timeout);
    } catch (const timeout_exceeded& e) {
        out << e.captured_output();
        err << "student suite timed out after " << args.timeout_s << " s\n";
        return 1;
    }
    if (suite.exit_status != 0) {
        out << suite.captured_output;
        err << "student suite failed (exit " << suite.exit_status << ")\n";
        return 1;
    }
    out << "student suite passed\n";

    GateDecision gate;
    long census = -1;
    if (args.gate) {
        census = census_student_tests(args.workspace, args.census_glob, args.census_pattern);
        gate = test_growth_gate(read_census_file(args.census_file), census, true);
    }

    SequenceRun sequence = run_feature_sequence(args.workspace, manifest, timeout);

    ForgeConfig forge_config{args.forge_url, args.repo, env_or("PROFCI_FORGE_TOKEN")};
    validate_forge_config(forge_config);
    HttpForge forge(forge_config, retry);

    BuildMeta meta{args.user, args.build_id, args.commit_id,
                   std::chrono::floor<std::chrono::seconds>(
                       std::chrono::system_clock::now())};
    EvaluateOptions options{gate, args.completion_title};
    EvaluationOutcome outcome =
        evaluate_build(sequence, manifest, forge.list_open_issue_titles(), meta, options);

    out << "score " << outcome.score << "/" << manifest.tasks.size() << "\n";
    if (outcome.completed) out << "exercise complete\n";
    if (gate.hold) out << "ticket held: " << gate.message << "\n";

    for (const ForgeAction& action : outcome.actions) {
        IssueRef ref = forge.apply_action(action);
        out << to_string(action.kind) << " #" << ref.number << ": " << action.title << "\n";
    }

    out << format_event_line(outcome.event);
    if (!args.events_file.empty()) {
        EventLog log;
        if (fs::exists(args.events_file)) log = EventLog::load(args.events_file);
        log.attach_file(args.events_file);
        log.ingest(outcome.event);
    }
    std::string report_url = args.report_url;
    if (report_url.empty()) report_url = env_or("PROFCI_REPORT_URL");
    if (report_url.empty()) report_url = manifest.report_endpoint;
    if (!report_url.empty())
        post_event(report_url, env_or("PROFCI_REPORT_TOKEN"), outcome.event, retry);

    if (args.gate) write_census_file(args.census_file, census);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"profci — exercise engine for CI-driven programming courses"};
    app.require_subcommand(1);

    // evaluate
    EvaluateArgs eval;
    eval.user = env_or("PROFCI_USER", env_or("USER", "student"));
    eval.build_id = env_or("PROFCI_BUILD_ID");
    eval.commit_id = env_or("PROFCI_COMMIT_ID", env_or("GITHUB_SHA", env_or("CI_COMMIT_SHA")));
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Run the exercise evaluation inside a CI job");
    evaluate->add_option("--workspace", eval.workspace, "Student working copy")
        ->capture_default_str();
    evaluate->add_option("--user", eval.user, "Student identifier for progress events");
    evaluate->add_option("--build-id", eval.build_id, "CI build identifier");
    evaluate->add_option("--commit-id", eval.commit_id, "Commit under evaluation");
    evaluate->add_option("--forge-url", eval.forge_url, "Forge REST base URL");
    evaluate->add_option("--repo", eval.repo, "Repository as owner/name");
    evaluate->add_flag("--gate", eval.gate,
                       "Hold the next ticket until the student test census grew");
    evaluate->add_option("--census-file", eval.census_file,
                         "File remembering the previous test census");
    evaluate->add_option("--census-glob", eval.census_glob, "Glob of student test files")
        ->capture_default_str();
    evaluate->add_option("--census-pattern", eval.census_pattern,
                         "Regex counting one test declaration per matching line")
        ->capture_default_str();
    evaluate->add_option("--timeout", eval.timeout_s, "Per-command timeout in seconds")
        ->capture_default_str();
    evaluate->add_option("--completion-title", eval.completion_title,
                         "Issue title announcing completion");
    evaluate->add_option("--events-file", eval.events_file,
                         "Also append the progress event to this file");
    evaluate->add_option("--report-url", eval.report_url,
                         "Progress-event endpoint (default: PROFCI_REPORT_URL or the "
                         "manifest's report_endpoint)");

    // report
    CLI::App* report = app.add_subcommand("report", "Render educator analytics");
    report->require_subcommand(1);

    std::string events_path, commits_path, manifest_path, format_text = "csv", out_path;
    int task_count = 0;
    bool strict = false;
    std::string tz_text = "UTC";
    long threshold_minutes = 120;
    std::string now_text;

    CLI::App* matrix_cmd =
        report->add_subcommand("time-matrix", "Active minutes per student and task");
    matrix_cmd->add_option("--events", events_path, "Progress-event file (JSON lines)")
        ->required();
    matrix_cmd->add_option("--manifest", manifest_path,
                           "Exercise manifest giving task order (educator copy)");
    matrix_cmd->add_option("--tasks", task_count, "Task count when no manifest is at hand");
    matrix_cmd->add_option("--format", format_text, "csv, json or svg")->capture_default_str();
    matrix_cmd->add_option("--out", out_path, "Write to this file instead of stdout");
    matrix_cmd->add_flag("--strict", strict,
                         "Fail on logs where a task completes without a hand-out");

    CLI::App* progress_cmd =
        report->add_subcommand("progress", "Score-over-time series per student");
    progress_cmd->add_option("--events", events_path, "Progress-event file (JSON lines)")
        ->required();
    progress_cmd->add_option("--format", format_text, "csv, json or svg")
        ->capture_default_str();
    progress_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

    CLI::App* punchcard_cmd =
        report->add_subcommand("punchcard", "Commit punch card (weekday x hour)");
    punchcard_cmd->add_option("--commits", commits_path, "Commit CSV user,commit_id,timestamp")
        ->required();
    punchcard_cmd->add_option("--format", format_text, "csv, json or svg")
        ->capture_default_str();
    punchcard_cmd->add_option("--out", out_path, "Write to this file instead of stdout");
    punchcard_cmd->add_option("--tz", tz_text, "Local time offset: UTC, +HH:MM or -HH:MM")
        ->capture_default_str();

    CLI::App* stuck_cmd =
        report->add_subcommand("stuck", "Students stalled on their current task");
    stuck_cmd->add_option("--events", events_path, "Progress-event file (JSON lines)")
        ->required();
    stuck_cmd->add_option("--manifest", manifest_path,
                          "Exercise manifest giving task names (educator copy)");
    stuck_cmd->add_option("--tasks", task_count, "Task count when no manifest is at hand");
    stuck_cmd->add_option("--threshold-minutes", threshold_minutes,
                          "Minimum active minutes without progress")
        ->capture_default_str();
    stuck_cmd->add_option("--now", now_text,
                          "Reference instant, RFC 3339 (default: last event)");
    stuck_cmd->add_option("--format", format_text, "csv or json")->capture_default_str();
    stuck_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

    // simulate
    SimConfig sim;
    std::string sim_out = "sim-out";
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic classroom");
    simulate_cmd->add_option("--students", sim.student_count, "Number of students")
        ->capture_default_str();
    simulate_cmd->add_option("--tasks", sim.task_count, "Number of exercise tasks")
        ->capture_default_str();
    simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate_cmd->add_option("--mean-minutes", sim.mean_task_minutes,
                             "Mean working minutes per build")
        ->capture_default_str();
    simulate_cmd->add_option("--regression", sim.regression_probability,
                             "Chance a build breaks an earlier task")
        ->capture_default_str();
    simulate_cmd->add_option("--anticipation", sim.anticipation_probability,
                             "Chance a build solves two tasks at once")
        ->capture_default_str();
    simulate_cmd->add_option("--breaks", sim.break_probability,
                             "Chance of a long pause before a build")
        ->capture_default_str();
    simulate_cmd->add_option("--session-hours", sim.session_hours,
                             "Working hours per sitting")
        ->capture_default_str();
    simulate_cmd->add_option("--out", sim_out, "Output directory")->capture_default_str();

    // serve-events
    std::string serve_file, serve_host = "127.0.0.1";
    int serve_port = 0;
    CLI::App* serve_cmd =
        app.add_subcommand("serve-events", "Run the progress-event ingestion endpoint");
    serve_cmd->add_option("--file", serve_file, "Durable event file (JSON lines)");
    serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve_port, "Port (0 = ephemeral, printed on start)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (evaluate->parsed()) return cmd_evaluate(eval, out, err);

        if (matrix_cmd->parsed()) {
            EventLog log = load_events_file(events_path);
            std::vector<std::string> ids = task_ids_for_report(manifest_path, task_count, log);
            TimeMatrix matrix = time_per_task(log, builds_from_events(log), ids, strict);
            write_output(render_report(matrix, parse_format(format_text)), out_path, out);
            return 0;
        }
        if (progress_cmd->parsed()) {
            EventLog log = load_events_file(events_path);
            SeriesSet set;
            for (const std::string& user : log.users())
                set.emplace_back(user, log.progress_series(user));
            write_output(render_report(set, parse_format(format_text)), out_path, out);
            return 0;
        }
        if (punchcard_cmd->parsed()) {
            auto offset = parse_utc_offset(tz_text);
            if (!offset) throw config_invalid("bad --tz \"" + tz_text + "\"");
            std::vector<CommitRecord> commits =
                parse_commits_csv(read_text_file(commits_path, "commit log"));
            std::vector<Timestamp> stamps;
            stamps.reserve(commits.size());
            for (const CommitRecord& c : commits) stamps.push_back(c.timestamp);
            write_output(render_report(punch_card(stamps, *offset), parse_format(format_text)),
                         out_path, out);
            return 0;
        }
        if (stuck_cmd->parsed()) {
            EventLog log = load_events_file(events_path);
            std::vector<std::string> ids = task_ids_for_report(manifest_path, task_count, log);
            Timestamp now{};
            if (!now_text.empty()) {
                auto parsed = parse_rfc3339(now_text);
                if (!parsed) throw config_invalid("bad --now timestamp");
                now = *parsed;
            } else {
                for (const ProgressEvent& e : log.events())
                    now = std::max(now, e.timestamp);
            }
            auto stuck = flag_stuck_users(log, now, std::chrono::minutes{threshold_minutes},
                                          ids);
            write_output(render_report(stuck, parse_format(format_text)), out_path, out);
            return 0;
        }
        if (simulate_cmd->parsed()) {
            SimOutcome outcome = simulate(sim);
            for (const fs::path& path : write_sim_artifacts(outcome, sim_out))
                out << path.string() << "\n";
            return 0;
        }
        if (serve_cmd->parsed()) {
            EventService service(env_or("PROFCI_REPORT_TOKEN"));
            if (!serve_file.empty()) service.attach_file(serve_file);
            int port = service.start(serve_host, serve_port);
            out << "listening on http://" << serve_host << ":" << port << "/events"
                << std::endl;
            for (;;) std::this_thread::sleep_for(std::chrono::hours{1});
        }
    } catch (const forge_unavailable& e) {
        err << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 2;
    }
    err << "no command selected\n";
    return 2;
}

} // namespace profci
