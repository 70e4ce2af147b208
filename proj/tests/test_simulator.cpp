#include "profci/errors.hpp"
#include "profci/evaluator.hpp"
#include "profci/render.hpp"
#include "profci/reporting.hpp"
#include "profci/simulator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace profci;
using testsupport::TempDir;

namespace {

std::map<std::string, std::vector<Timestamp>> builds_by_user(const SimOutcome& outcome) {
    std::map<std::string, std::vector<Timestamp>> builds;
    for (const ProgressEvent& e : outcome.events) builds[e.user].push_back(e.timestamp);
    return builds;
}

std::vector<std::string> task_ids_of(const SimOutcome& outcome) {
    std::vector<std::string> ids;
    for (const TaskDef& t : outcome.manifest.tasks) ids.push_back(t.id);
    return ids;
}

int open_count_for_title(const std::vector<FakeForge::Issue>& issues, const std::string& title) {
    int n = 0;
    for (const auto& issue : issues)
        if (issue.state == IssueState::open && issue.title == title) ++n;
    return n;
}

} // namespace

TEST_CASE("sim config validation names the offending field") {
    CHECK_NOTHROW(validate_sim_config(SimConfig{}));

    auto rejects = [](SimConfig cfg, const std::string& needle) {
        try {
            validate_sim_config(cfg);
            FAIL_CHECK("expected config_invalid mentioning " << needle);
        } catch (const config_invalid& ex) {
            CHECK(std::string(ex.what()).find(needle) != std::string::npos);
        }
    };

    SimConfig cfg;
    cfg.student_count = 0;
    rejects(cfg, "student_count");

    cfg = SimConfig{};
    cfg.task_count = 0;
    rejects(cfg, "task_count");

    cfg = SimConfig{};
    cfg.mean_task_minutes = 0.0;
    rejects(cfg, "mean_task_minutes");

    cfg = SimConfig{};
    cfg.regression_probability = -0.1;
    rejects(cfg, "regression_probability");

    cfg = SimConfig{};
    cfg.anticipation_probability = 1.5;
    rejects(cfg, "anticipation_probability");

    cfg = SimConfig{};
    cfg.break_probability = 2.0;
    rejects(cfg, "break_probability");

    cfg = SimConfig{};
    cfg.session_hours = 0.0;
    rejects(cfg, "session_hours");

    cfg = SimConfig{};
    cfg.student_count = -3;
    CHECK_THROWS_AS(simulate(cfg), config_invalid);
}

TEST_CASE("the synthetic manifest is a valid exercise document") {
    ExerciseManifest small = make_sim_manifest(5);
    CHECK(small.tasks.size() == 5);
    CHECK(small.tasks[0].id == "task-01");
    CHECK(small.tasks[4].id == "task-05");
    CHECK(small.tasks[0].title == "Shop feature 01");
    CHECK(small.tasks[2].hints.size() == 1); // every third task carries a hint
    CHECK(small.tasks[0].hints.empty());
    CHECK_FALSE(small.survey_url.empty());

    // Round trips through the manifest codec like any real exercise.
    CHECK(parse_manifest(serialize_manifest(small)) == small);

    ExerciseManifest wide = make_sim_manifest(120);
    CHECK(wide.tasks[0].id == "task-001");
    CHECK(wide.tasks[119].id == "task-120");
}

TEST_CASE("one diligent student on a one-task exercise leaves the minimal trace") {
    SimConfig cfg;
    cfg.student_count = 1;
    cfg.task_count = 1;
    cfg.seed = 5;
    cfg.regression_probability = 0.0;
    cfg.anticipation_probability = 0.0;
    cfg.break_probability = 0.0;

    SimOutcome outcome = simulate(cfg);

    // Exactly two builds: the hand-out at score 0 and the solve at score 1.
    REQUIRE(outcome.events.size() == 2);
    CHECK(outcome.events[0].user == "student-01");
    CHECK(outcome.events[0].score == 0);
    CHECK(outcome.events[1].score == 1);
    CHECK(outcome.events[0].timestamp < outcome.events[1].timestamp);
    CHECK(outcome.events[0].build_id != outcome.events[1].build_id);

    // One ticket for the failing feature, then one completion issue.
    REQUIRE(outcome.forge_transcript.size() == 2);
    const AppliedAction& ticket = outcome.forge_transcript[0];
    CHECK(ticket.action.kind == ForgeActionKind::create_issue);
    CHECK(ticket.action.title == "Shop feature 01");
    CHECK(ticket.issue_number == 1);
    const AppliedAction& completion = outcome.forge_transcript[1];
    CHECK(completion.action.kind == ForgeActionKind::create_completion_issue);
    CHECK(completion.action.title == kDefaultCompletionTitle);
    CHECK(completion.action.body.find(outcome.manifest.survey_url) != std::string::npos);

    // Ground truth: handed out at the first build, completed at the second.
    const auto& truth = outcome.ground_truth.at("student-01");
    REQUIRE(truth.size() == 1);
    CHECK(truth[0].task_id == "task-01");
    CHECK(truth[0].handed_out == outcome.events[0].timestamp);
    CHECK(truth[0].completed == outcome.events[1].timestamp);
    CHECK_FALSE(truth[0].anticipated);

    const auto& repo = outcome.forge_end_state.at("student-01");
    REQUIRE(repo.size() == 2);
    CHECK(open_count_for_title(repo, std::string(kDefaultCompletionTitle)) == 1);

    // Each build pushed a commit; extras never outnumber one per build.
    CHECK(outcome.commits.size() >= 2);
}

TEST_CASE("a fixed seed reproduces the outcome byte for byte") {
    SimConfig cfg;
    cfg.student_count = 5;
    cfg.task_count = 6;
    cfg.seed = 7;

    std::string first = serialize_sim_outcome(simulate(cfg));
    std::string second = serialize_sim_outcome(simulate(cfg));
    CHECK(first == second);
    CHECK(first.size() > 1000); // a real document, not a stub

    SimConfig other = cfg;
    other.seed = 8;
    CHECK(serialize_sim_outcome(simulate(other)) != first);
}

TEST_CASE("a student's trace does not depend on class size") {
    SimConfig solo;
    solo.student_count = 1;
    solo.task_count = 5;
    solo.seed = 9;
    SimConfig trio = solo;
    trio.student_count = 3;

    SimOutcome alone = simulate(solo);
    SimOutcome crowd = simulate(trio);

    auto trace_of = [](const SimOutcome& outcome, const std::string& user) {
        std::vector<ProgressEvent> events;
        for (const ProgressEvent& e : outcome.events)
            if (e.user == user) events.push_back(e);
        return events;
    };
    CHECK(trace_of(alone, "student-01") == trace_of(crowd, "student-01"));
    CHECK(alone.ground_truth.at("student-01") == crowd.ground_truth.at("student-01"));
    CHECK(alone.forge_end_state.at("student-01") == crowd.forge_end_state.at("student-01"));
}

TEST_CASE("the default classroom produces anticipations and regressions") {
    SimConfig cfg; // 30 students x 25 tasks
    cfg.seed = 42;
    SimOutcome outcome = simulate(cfg);

    CHECK(outcome.events.size() >= 30u * 26u); // hand-out plus one per task, minimum

    // At least one student jumped two tasks in one push, so the matrix has
    // a blank (anticipated) cell for a completed exercise.
    EventLog log;
    for (const ProgressEvent& e : outcome.events) log.ingest(e);
    TimeMatrix matrix = time_per_task(log, builds_by_user(outcome), task_ids_of(outcome));
    bool any_blank = false;
    for (const auto& row : matrix.cells)
        for (const auto& cell : row) any_blank = any_blank || cell.blank;
    CHECK(any_blank);

    // And at least one build lowered a score.
    bool any_drop = false;
    std::map<std::string, int> last_score;
    for (const ProgressEvent& e : outcome.events) {
        auto it = last_score.find(e.user);
        if (it != last_score.end() && e.score < it->second) any_drop = true;
        last_score[e.user] = e.score;
    }
    CHECK(any_drop);

    // Everyone finishes, and scores never exceed the task count.
    for (const auto& [user, score] : last_score) CHECK(score == cfg.task_count);
    for (const ProgressEvent& e : outcome.events) {
        CHECK(e.score >= 0);
        CHECK(e.score <= cfg.task_count);
    }
}

TEST_CASE("outcome streams are sorted and build ids never collide") {
    SimConfig cfg;
    cfg.student_count = 8;
    cfg.task_count = 10;
    cfg.seed = 3;
    SimOutcome outcome = simulate(cfg);

    for (size_t i = 1; i < outcome.events.size(); ++i)
        CHECK(outcome.events[i - 1].timestamp <= outcome.events[i].timestamp);
    for (size_t i = 1; i < outcome.commits.size(); ++i)
        CHECK(outcome.commits[i - 1].timestamp <= outcome.commits[i].timestamp);

    EventLog log;
    for (const ProgressEvent& e : outcome.events)
        CHECK(log.ingest(e) == IngestResult::appended);
    CHECK(log.events().size() == outcome.events.size());
}

TEST_CASE("ground truth agrees with what the analytics recover") {
    SimConfig cfg;
    cfg.student_count = 6;
    cfg.task_count = 8;
    cfg.seed = 123;
    SimOutcome outcome = simulate(cfg);

    EventLog log;
    for (const ProgressEvent& e : outcome.events) log.ingest(e);
    TimeMatrix matrix = time_per_task(log, builds_by_user(outcome), task_ids_of(outcome));

    REQUIRE(matrix.users.size() == 6);
    REQUIRE(matrix.task_ids == task_ids_of(outcome));
    for (size_t u = 0; u < matrix.users.size(); ++u) {
        const auto& truth = outcome.ground_truth.at(matrix.users[u]);
        REQUIRE(truth.size() == matrix.cells[u].size());
        for (size_t k = 0; k < truth.size(); ++k) {
            const GroundTruthTask& gt = truth[k];
            const TimeMatrix::Cell& cell = matrix.cells[u][k];
            // Blank exactly when the simulator never handed the task out.
            CHECK(cell.blank == !gt.handed_out.has_value());
            CHECK(gt.anticipated == !gt.handed_out.has_value());
            if (!cell.blank) {
                CHECK(cell.active >= std::chrono::seconds{0});
                REQUIRE(gt.completed.has_value());
                CHECK(*gt.handed_out <= *gt.completed);
            }
        }
        // The recovered series climbs to a finished exercise.
        auto series = log.progress_series(matrix.users[u]);
        REQUIRE_FALSE(series.empty());
        CHECK(series.back().second == cfg.task_count);
    }
}

TEST_CASE("forge end states obey the one-open-issue rule") {
    for (uint64_t seed : {1u, 2u, 3u}) {
        SimConfig cfg;
        cfg.student_count = 5;
        cfg.task_count = 7;
        cfg.seed = seed;
        cfg.regression_probability = 0.25;
        cfg.anticipation_probability = 0.2;
        SimOutcome outcome = simulate(cfg);

        for (const auto& [user, issues] : outcome.forge_end_state) {
            std::set<std::string> titles;
            for (const auto& issue : issues) titles.insert(issue.title);
            for (const std::string& title : titles)
                CHECK(open_count_for_title(issues, title) <= 1);
            // Everyone finished, so the completion issue is there.
            CHECK(open_count_for_title(issues, std::string(kDefaultCompletionTitle)) == 1);
        }
        for (const AppliedAction& applied : outcome.forge_transcript) {
            CHECK(applied.issue_number > 0);
            CHECK_FALSE(applied.action.body.empty());
        }
    }
}

TEST_CASE("score drops coincide with a ticket action on the regressed task") {
    SimConfig cfg;
    cfg.student_count = 10;
    cfg.task_count = 12;
    cfg.seed = 2026;
    cfg.regression_probability = 0.2;
    SimOutcome outcome = simulate(cfg);

    int drops_checked = 0;
    std::map<std::string, int> last_score;
    for (const ProgressEvent& e : outcome.events) {
        auto it = last_score.find(e.user);
        if (it != last_score.end() && e.score < it->second) {
            const std::string& regressed_title =
                outcome.manifest.tasks[static_cast<size_t>(e.score)].title;
            bool matched = false;
            for (const AppliedAction& applied : outcome.forge_transcript)
                if (applied.build_id == e.build_id && applied.user == e.user)
                    matched = matched || applied.action.title == regressed_title;
            CHECK(matched);
            ++drops_checked;
        }
        last_score[e.user] = e.score;
    }
    CHECK(drops_checked > 0);
}

TEST_CASE("every report renders from simulated data without complaint") {
    SimConfig cfg;
    cfg.student_count = 4;
    cfg.task_count = 6;
    cfg.seed = 77;
    SimOutcome outcome = simulate(cfg);

    EventLog log;
    for (const ProgressEvent& e : outcome.events) log.ingest(e);
    auto builds = builds_by_user(outcome);
    auto ids = task_ids_of(outcome);

    TimeMatrix matrix = time_per_task(log, builds, ids);
    SeriesSet series;
    for (const std::string& user : log.users()) series.emplace_back(user, log.progress_series(user));
    std::vector<Timestamp> commit_times;
    for (const CommitRecord& c : outcome.commits) commit_times.push_back(c.timestamp);
    PunchCard card = punch_card(commit_times);
    CHECK(card.total() == static_cast<long>(outcome.commits.size()));

    Timestamp now = outcome.events.back().timestamp + std::chrono::hours{1};
    auto stuck = flag_stuck_users(log, now, std::chrono::minutes{90}, ids);

    for (ReportFormat format : {ReportFormat::csv, ReportFormat::json, ReportFormat::svg}) {
        CHECK_FALSE(render_report(matrix, format).empty());
        CHECK_FALSE(render_report(series, format).empty());
        CHECK_FALSE(render_report(card, format).empty());
    }
    CHECK_FALSE(render_report(stuck, ReportFormat::csv).empty());
    CHECK_FALSE(render_report(stuck, ReportFormat::json).empty());
}

TEST_CASE("sim artifacts land on disk and read back cleanly") {
    SimConfig cfg;
    cfg.student_count = 3;
    cfg.task_count = 4;
    cfg.seed = 11;
    SimOutcome outcome = simulate(cfg);

    TempDir dir("simart");
    auto paths = write_sim_artifacts(outcome, dir.path() / "out");
    REQUIRE(paths.size() == 4);
    CHECK(paths[0].filename() == "events.jsonl");
    CHECK(paths[1].filename() == "commits.csv");
    CHECK(paths[2].filename() == "ground_truth.json");
    CHECK(paths[3].filename() == "forge_transcript.json");
    for (const auto& path : paths) CHECK(std::filesystem::file_size(path) > 0);

    EventLog reloaded = EventLog::load(paths[0]);
    CHECK(reloaded.events().size() == outcome.events.size());
    CHECK(parse_commits_csv(testsupport::read_file(paths[1])) == outcome.commits);

    // Writing the same outcome twice is byte-stable.
    auto again = write_sim_artifacts(outcome, dir.path() / "out2");
    for (size_t i = 0; i < paths.size(); ++i)
        CHECK(testsupport::read_file(paths[i]) == testsupport::read_file(again[i]));
}
