#pragma once

#include "profci/evaluator.hpp"
#include "profci/timeutil.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace profci {

std::string format_event_line(const ProgressEvent& event); // one JSON object, "\n" terminated
ProgressEvent parse_event_line(const std::string& line, int line_number = 0);

enum class IngestResult { appended, duplicate };

// Append-only progress-event store. Ingestion order need not be timestamp
// order; queries see per-user events sorted by timestamp (ties keep
// ingestion order). Duplicate (user, build_id) pairs are ignored.
class EventLog {
public:
    EventLog() = default;

    // Loads an existing line-delimited event file; throws malformed_document
    // on a bad line, storage_failure when the file cannot be read.
    static EventLog load(const std::filesystem::path& file);

    // Future ingests are also appended (and flushed) to this file.
    void attach_file(const std::filesystem::path& file);

    IngestResult ingest(const ProgressEvent& event);

    std::vector<std::string> users() const; // sorted
    size_t size() const { return events_.size(); }

    // Timestamp-sorted (stable) progress points for one user; empty for an
    // unknown user. Score drops are preserved.
    std::vector<std::pair<Timestamp, int>> progress_series(const std::string& user) const;

    const std::vector<ProgressEvent>& events() const { return events_; }

private:
    std::vector<ProgressEvent> events_;
    std::set<std::pair<std::string, std::string>> seen_; // (user, build_id)
    std::filesystem::path file_;
};

// Active working time between two builds, after the inactivity rule: a
// gap of at most 60 minutes counts fully, a longer gap counts as a
// 15-minute resumption credit. start and end must be elements of builds.
std::chrono::seconds active_time(const std::vector<Timestamp>& builds, Timestamp start,
                                 Timestamp end);

struct TimeMatrix {
    struct Cell {
        bool blank = true;   // task never handed out (anticipated or unreached)
        std::chrono::seconds active{0};

        bool operator==(const Cell&) const = default;
        double minutes() const { return std::chrono::duration<double>(active).count() / 60.0; }
    };

    std::vector<std::string> users;    // sorted
    std::vector<std::string> task_ids; // manifest order
    std::vector<std::vector<Cell>> cells; // [user][task]

    bool operator==(const TimeMatrix&) const = default;
};

// Per-user, per-task accumulated active minutes. Task k is handed out at
// the first event with score == k, completed at the first later event
// with score > k; re-work episodes accumulate into the same cell, and an
// episode still open at the end runs until the user's last build. With
// strict on, a completed task that was never handed out (a score jump)
// raises inconsistent_log instead of leaving the cell blank.
TimeMatrix time_per_task(const EventLog& log,
                         const std::map<std::string, std::vector<Timestamp>>& builds_per_user,
                         const std::vector<std::string>& task_ids, bool strict = false);

struct PunchCard {
    // weekday (0 = Sunday) x hour of day
    std::array<std::array<long, 24>, 7> counts{};

    bool operator==(const PunchCard&) const = default;
    long total() const;
};

PunchCard punch_card(const std::vector<Timestamp>& commits, UtcOffset timezone = {});

struct CommitRecord {
    std::string user;
    std::string commit_id;
    Timestamp timestamp{};

    bool operator==(const CommitRecord&) const = default;
};

// CSV "user,commit_id,timestamp" with optional header row.
std::vector<CommitRecord> parse_commits_csv(const std::string& text);
std::string format_commits_csv(const std::vector<CommitRecord>& commits);

struct StuckUser {
    std::string user;
    std::string task_id;
    size_t task_index = 0;
    double stalled_minutes = 0;
    int solver_count = 0; // other users already past that task
};

// Users whose latest score has not moved for at least threshold of active
// time and who have not completed the exercise. The ongoing gap from the
// last build to `now` counts fully when at most 60 minutes, else as the
// 15-minute resumption credit.
std::vector<StuckUser> flag_stuck_users(const EventLog& log, Timestamp now,
                                        std::chrono::minutes stall_threshold,
                                        const std::vector<std::string>& task_ids);

} // namespace profci
