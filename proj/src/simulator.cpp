#include "profci/simulator.hpp"

#include "profci/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace profci {

using nlohmann::json;
using std::chrono::hours;
using std::chrono::minutes;

namespace {

// splitmix64 (Steele/Lea/Flood): tiny, well-documented, stable across
// platforms — outcomes stay reproducible for a given seed.
struct SplitMix64 {
    uint64_t state = 0;

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; } // [0, 1)

    bool chance(double p) { return uniform() < p; }

    long uniform_int(long lo, long hi) { // inclusive bounds
        return lo + static_cast<long>(next() % static_cast<uint64_t>(hi - lo + 1));
    }

    long exp_minutes(double mean) {
        double draw = -mean * std::log1p(-uniform());
        return std::max(1L, std::lround(draw));
    }
};

std::string pad_number(long value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*ld", width, value);
    return buf;
}

int digits_for(int count) { return count >= 100 ? 3 : 2; }

// score s -> an executed prefix with tasks 0..s-1 passing and, unless the
// exercise is complete, task s failing.
SequenceRun fabricate_run(const ExerciseManifest& manifest, int score) {
    SequenceRun run;
    const size_t total = manifest.tasks.size();
    const size_t executed = std::min<size_t>(static_cast<size_t>(score) + 1, total);
    for (size_t i = 0; i < executed; ++i) {
        const TaskDef& task = manifest.tasks[i];
        const bool passing = static_cast<int>(i) < score;
        TaskRunRecord record;
        record.task_id = task.id;
        record.exit_status = passing ? 0 : 1;
        record.result = TaskResult{task.id,
                                   task.title,
                                   passing ? TaskStatus::pass : TaskStatus::fail,
                                   task.description,
                                   passing ? "" : "expected that " + task.description.then,
                                   task.hints};
        run.per_task.push_back(std::move(record));
    }
    run.executed_count = executed;
    if (static_cast<size_t>(score) < total) run.first_failure_index = static_cast<size_t>(score);
    return run;
}

json issue_to_json(const FakeForge::Issue& issue) {
    return json{{"number", issue.number},
                {"title", issue.title},
                {"state", issue.state == IssueState::open ? "open" : "closed"},
                {"body", issue.body},
                {"comments", issue.comments}};
}

json ground_truth_to_json(const std::map<std::string, std::vector<GroundTruthTask>>& truth) {
    json users = json::object();
    for (const auto& [user, tasks] : truth) {
        json arr = json::array();
        for (const GroundTruthTask& gt : tasks) {
            json entry{{"task_id", gt.task_id}, {"anticipated", gt.anticipated}};
            entry["handed_out"] =
                gt.handed_out ? json(format_rfc3339(*gt.handed_out)) : json(nullptr);
            entry["completed"] =
                gt.completed ? json(format_rfc3339(*gt.completed)) : json(nullptr);
            arr.push_back(std::move(entry));
        }
        users[user] = std::move(arr);
    }
    return json{{"users", std::move(users)}};
}

json transcript_to_json(const SimOutcome& outcome) {
    json actions = json::array();
    for (const AppliedAction& applied : outcome.forge_transcript) {
        actions.push_back(json{{"user", applied.user},
                               {"build_id", applied.build_id},
                               {"kind", to_string(applied.action.kind)},
                               {"title", applied.action.title},
                               {"body", applied.action.body},
                               {"issue_number", applied.issue_number}});
    }
    json repos = json::object();
    for (const auto& [user, issues] : outcome.forge_end_state) {
        json arr = json::array();
        for (const FakeForge::Issue& issue : issues) arr.push_back(issue_to_json(issue));
        repos[user] = std::move(arr);
    }
    return json{{"transcript", std::move(actions)}, {"end_state", std::move(repos)}};
}

} // namespace

void validate_sim_config(const SimConfig& config) {
    if (config.student_count < 1) throw config_invalid("student_count must be at least 1");
    if (config.task_count < 1) throw config_invalid("task_count must be at least 1");
    if (!(config.mean_task_minutes > 0))
        throw config_invalid("mean_task_minutes must be positive");
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!probability(config.regression_probability))
        throw config_invalid("regression_probability must be within [0, 1]");
    if (!probability(config.anticipation_probability))
        throw config_invalid("anticipation_probability must be within [0, 1]");
    if (!probability(config.break_probability))
        throw config_invalid("break_probability must be within [0, 1]");
    if (!(config.session_hours > 0)) throw config_invalid("session_hours must be positive");
}

ExerciseManifest make_sim_manifest(int task_count) {
    const int width = digits_for(task_count);
    ExerciseManifest manifest;
    manifest.exercise_name = "simulated-webshop";
    manifest.student_suite_command = {"true"};
    manifest.completion_body_template =
        "Congratulations, you have completed the exercise!\n\n"
        "Please take a moment to fill out the feedback survey: {survey_url}\n";
    manifest.survey_url = "https://example.edu/survey/simulated-webshop";
    for (int k = 1; k <= task_count; ++k) {
        const std::string number = pad_number(k, width);
        TaskDef task;
        task.id = "task-" + number;
        task.title = "Shop feature " + number;
        task.description.given = k == 1 ? "a freshly cloned webshop template"
                                        : "a shop with feature " + pad_number(k - 1, width) +
                                              " in place";
        task.description.when = "the customer exercises feature " + number;
        task.description.then = "the shop responds with the feature " + number + " behavior";
        if (k % 3 == 0) task.hints = {"Look into the module behind feature " + number + "."};
        task.command = {"true"};
        manifest.tasks.push_back(std::move(task));
    }
    return manifest;
}

SimOutcome simulate(const SimConfig& config) {
    validate_sim_config(config);

    SimOutcome outcome;
    outcome.manifest = make_sim_manifest(config.task_count);
    const ExerciseManifest& manifest = outcome.manifest;
    const int task_count = config.task_count;
    const int user_width = digits_for(config.student_count);
    const double session_budget = config.session_hours * 60.0;

    // Monday 09:00 UTC; any fixed instant works, a weekday morning makes
    // the punch cards look like the real thing.
    const Timestamp epoch =
        std::chrono::sys_days{std::chrono::year{2016} / std::chrono::March / 7} + hours{9};

    // One stream per student, seeded up front, so a student's trace does
    // not depend on the class size.
    SplitMix64 seeder{config.seed};
    std::vector<uint64_t> stream_seeds(static_cast<size_t>(config.student_count));
    for (uint64_t& s : stream_seeds) s = seeder.next();

    for (int i = 0; i < config.student_count; ++i) {
        SplitMix64 rng{stream_seeds[static_cast<size_t>(i)]};
        const std::string user = "student-" + pad_number(i + 1, user_width);

        FakeForge forge;
        std::vector<GroundTruthTask> truth(static_cast<size_t>(task_count));
        for (int k = 0; k < task_count; ++k)
            truth[static_cast<size_t>(k)].task_id = manifest.tasks[static_cast<size_t>(k)].id;

        Timestamp t = epoch + minutes{i * 7 + rng.uniform_int(0, 119)};
        double session_used = 0.0;
        int score = 0;
        int build_seq = 0;
        int prev_score = 0;

        auto do_build = [&](int new_score) {
            ++build_seq;
            const std::string build_id = user + "-b" + pad_number(build_seq, 3);
            const std::string commit_id = user + "-c" + pad_number(build_seq, 3);
            outcome.commits.push_back({user, commit_id, t});

            SequenceRun run = fabricate_run(manifest, new_score);
            EvaluationOutcome evaluated = evaluate_build(
                run, manifest, forge.list_open_issue_titles(),
                BuildMeta{user, build_id, commit_id, t});
            for (const ForgeAction& action : evaluated.actions) {
                IssueRef ref = forge.apply_action(action);
                outcome.forge_transcript.push_back({user, build_id, action, ref.number});
            }
            outcome.events.push_back(evaluated.event);

            // Mirrors what the analytics can recover from the events: a
            // task skipped by an anticipation jump stays anticipated
            // unless a later regression lands on its score, which hands
            // it out after all.
            if (new_score < task_count) {
                GroundTruthTask& current = truth[static_cast<size_t>(new_score)];
                if (!current.handed_out) {
                    current.handed_out = t;
                    current.anticipated = false;
                }
            }
            for (int k = 0; k < new_score && k < task_count; ++k) {
                GroundTruthTask& done = truth[static_cast<size_t>(k)];
                if (done.handed_out) {
                    if (!done.completed) done.completed = t;
                } else {
                    done.anticipated = true;
                }
            }

            // A solved ticket is sometimes tidied up right away; a later
            // regression then opens a fresh issue instead of a comment.
            for (int k = prev_score; k < new_score && k < task_count; ++k) {
                if (!rng.chance(0.5)) continue;
                const std::string& title = manifest.tasks[static_cast<size_t>(k)].title;
                int lowest = 0;
                for (const FakeForge::Issue& issue : forge.dump())
                    if (issue.state == IssueState::open && issue.title == title &&
                        (lowest == 0 || issue.number < lowest))
                        lowest = issue.number;
                if (lowest != 0) forge.close_issue(lowest);
            }
            prev_score = new_score;
        };

        do_build(0); // hand-out build: score 0, first ticket opened

        bool must_recover = false;
        bool skip_regression = false;
        int resume_score = 0;
        while (score < task_count) {
            const long work = rng.exp_minutes(config.mean_task_minutes);
            if (session_used + static_cast<double>(work) > session_budget) {
                t += minutes{16 * 60 + rng.uniform_int(0, 119)}; // overnight
                session_used = 0.0;
            } else if (rng.chance(config.break_probability)) {
                t += minutes{rng.uniform_int(61, 180)}; // a long pause
            }
            t += minutes{work};
            session_used += static_cast<double>(work);

            int next;
            if (must_recover) {
                next = resume_score;
                must_recover = false;
                skip_regression = true; // straight back to work after the fix
            } else if (!skip_regression && score >= 1 &&
                       rng.chance(config.regression_probability)) {
                resume_score = score;
                next = static_cast<int>(rng.uniform_int(0, score - 1));
                must_recover = true;
            } else if (score + 2 <= task_count && rng.chance(config.anticipation_probability)) {
                next = score + 2; // two features in one push
                skip_regression = false;
            } else {
                next = score + 1;
                skip_regression = false;
            }

            do_build(next);
            score = next;

            if (rng.chance(0.3)) { // an extra commit that never reached CI
                outcome.commits.push_back({user,
                                           user + "-c" + pad_number(build_seq, 3) + "x",
                                           t + minutes{rng.uniform_int(1, 30)}});
            }
        }

        outcome.ground_truth[user] = std::move(truth);
        outcome.forge_end_state[user] = forge.dump();
    }

    auto event_key = [](const ProgressEvent& e) {
        return std::tie(e.timestamp, e.user, e.build_id);
    };
    std::stable_sort(outcome.events.begin(), outcome.events.end(),
                     [&](const ProgressEvent& a, const ProgressEvent& b) {
                         return event_key(a) < event_key(b);
                     });
    std::stable_sort(outcome.commits.begin(), outcome.commits.end(),
                     [](const CommitRecord& a, const CommitRecord& b) {
                         return std::tie(a.timestamp, a.user, a.commit_id) <
                                std::tie(b.timestamp, b.user, b.commit_id);
                     });
    return outcome;
}

std::string serialize_sim_outcome(const SimOutcome& outcome) {
    json events = json::array();
    for (const ProgressEvent& e : outcome.events)
        events.push_back(json::parse(format_event_line(e)));
    json commits = json::array();
    for (const CommitRecord& c : outcome.commits)
        commits.push_back(json{{"user", c.user},
                               {"commit_id", c.commit_id},
                               {"timestamp", format_rfc3339(c.timestamp)}});
    json doc{{"manifest", json::parse(serialize_manifest(outcome.manifest))},
             {"events", std::move(events)},
             {"commits", std::move(commits)},
             {"ground_truth", ground_truth_to_json(outcome.ground_truth)},
             {"forge", transcript_to_json(outcome)}};
    return doc.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_sim_artifacts(const SimOutcome& outcome,
                                                       const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    auto write = [&](const std::string& name, const std::string& content) {
        std::filesystem::path path = directory / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw storage_failure("cannot write " + path.string());
        out << content;
        out.flush();
        if (!out) throw storage_failure("write to " + path.string() + " failed");
        return path;
    };

    std::string events_text;
    for (const ProgressEvent& e : outcome.events) events_text += format_event_line(e);

    return {write("events.jsonl", events_text),
            write("commits.csv", format_commits_csv(outcome.commits)),
            write("ground_truth.json", ground_truth_to_json(outcome.ground_truth).dump(2) + "\n"),
            write("forge_transcript.json", transcript_to_json(outcome).dump(2) + "\n")};
}

} // namespace profci
