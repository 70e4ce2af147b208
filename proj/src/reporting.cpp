#include "profci/reporting.hpp"

#include "profci/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace profci {

using nlohmann::json;

std::string format_event_line(const ProgressEvent& event) {
    json obj{{"user", event.user},
             {"score", event.score},
             {"timestamp", format_rfc3339(event.timestamp)},
             {"build_id", event.build_id},
             {"commit_id", event.commit_id}};
    return obj.dump() + "\n";
}

ProgressEvent parse_event_line(const std::string& line, int line_number) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw malformed_document("event line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!obj.is_object())
        throw malformed_document("event line " + std::to_string(line_number) +
                                 ": not an object");
    ProgressEvent event;
    if (!obj.contains("user") || !obj["user"].is_string() || !obj.contains("score") ||
        !obj["score"].is_number_integer() || !obj.contains("timestamp") ||
        !obj["timestamp"].is_string())
        throw malformed_document("event line " + std::to_string(line_number) +
                                 ": missing user/score/timestamp");
    event.user = obj["user"].get<std::string>();
    event.score = obj["score"].get<int>();
    if (event.score < 0)
        throw malformed_document("event line " + std::to_string(line_number) +
                                 ": negative score");
    auto ts = parse_rfc3339(obj["timestamp"].get<std::string>());
    if (!ts)
        throw malformed_document("event line " + std::to_string(line_number) +
                                 ": bad timestamp");
    event.timestamp = *ts;
    event.build_id = obj.value("build_id", "");
    event.commit_id = obj.value("commit_id", "");
    return event;
}

EventLog EventLog::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw storage_failure("cannot open " + file.string());
    EventLog log;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        log.ingest(parse_event_line(line, line_number));
    }
    return log;
}

void EventLog::attach_file(const std::filesystem::path& file) { file_ = file; }

IngestResult EventLog::ingest(const ProgressEvent& event) {
    if (!seen_.insert({event.user, event.build_id}).second) return IngestResult::duplicate;
    events_.push_back(event);
    if (!file_.empty()) {
        std::ofstream out(file_, std::ios::app);
        if (!out) throw storage_failure("cannot append to " + file_.string());
        out << format_event_line(event);
        out.flush();
        if (!out) throw storage_failure("write to " + file_.string() + " failed");
    }
    return IngestResult::appended;
}

std::vector<std::string> EventLog::users() const {
    std::set<std::string> names;
    for (const ProgressEvent& e : events_) names.insert(e.user);
    return {names.begin(), names.end()};
}

std::vector<std::pair<Timestamp, int>> EventLog::progress_series(const std::string& user) const {
    std::vector<std::pair<Timestamp, int>> series;
    for (const ProgressEvent& e : events_)
        if (e.user == user) series.emplace_back(e.timestamp, e.score);
    std::stable_sort(series.begin(), series.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return series;
}

std::chrono::seconds active_time(const std::vector<Timestamp>& builds, Timestamp start,
                                 Timestamp end) {
    using namespace std::chrono;
    if (start > end) throw bounds_not_builds("start is after end");
    auto is_build = [&](Timestamp t) {
        return std::binary_search(builds.begin(), builds.end(), t);
    };
    if (!is_build(start)) throw bounds_not_builds("start is not a build timestamp");
    if (!is_build(end)) throw bounds_not_builds("end is not a build timestamp");

    constexpr auto kInactivityGap = minutes{60};
    constexpr auto kResumptionCredit = minutes{15};

    seconds total{0};
    auto from = std::lower_bound(builds.begin(), builds.end(), start);
    auto to = std::lower_bound(builds.begin(), builds.end(), end);
    for (auto it = from; it != to; ++it) {
        seconds gap = *(it + 1) - *it;
        total += gap <= kInactivityGap ? gap : seconds{kResumptionCredit};
    }
    return total;
}

TimeMatrix time_per_task(const EventLog& log,
                         const std::map<std::string, std::vector<Timestamp>>& builds_per_user,
                         const std::vector<std::string>& task_ids, bool strict) {
    TimeMatrix matrix;
    matrix.users = log.users();
    matrix.task_ids = task_ids;
    matrix.cells.assign(matrix.users.size(),
                        std::vector<TimeMatrix::Cell>(task_ids.size()));

    for (size_t u = 0; u < matrix.users.size(); ++u) {
        const std::string& user = matrix.users[u];
        auto series = log.progress_series(user);
        if (series.empty()) continue;

        auto builds_it = builds_per_user.find(user);
        if (builds_it == builds_per_user.end() || builds_it->second.empty())
            throw inconsistent_log("no builds recorded for user " + user);
        const std::vector<Timestamp>& builds = builds_it->second;
        const Timestamp last_build = builds.back();

        for (size_t k = 0; k < task_ids.size(); ++k) {
            TimeMatrix::Cell& cell = matrix.cells[u][k];
            const int score_k = static_cast<int>(k);
            std::optional<Timestamp> open;
            bool handed_out = false;
            bool completed = false;
            std::chrono::seconds total{0};

            for (const auto& [ts, score] : series) {
                if (!open && score == score_k) {
                    open = ts;
                    handed_out = true;
                } else if (open && score > score_k) {
                    total += active_time(builds, *open, ts);
                    open.reset();
                }
                if (score > score_k) completed = true;
            }
            if (open) total += active_time(builds, *open, last_build);

            if (handed_out) {
                cell.blank = false;
                cell.active = total;
            } else if (completed && strict) {
                throw inconsistent_log("user " + user + " completed task " + task_ids[k] +
                                       " without a hand-out");
            }
        }
    }
    return matrix;
}

long PunchCard::total() const {
    long sum = 0;
    for (const auto& row : counts)
        for (long c : row) sum += c;
    return sum;
}

PunchCard punch_card(const std::vector<Timestamp>& commits, UtcOffset timezone) {
    using namespace std::chrono;
    PunchCard card;
    for (Timestamp t : commits) {
        sys_seconds local = t + timezone.offset;
        auto day = floor<days>(local);
        weekday wd{day};
        auto hour = duration_cast<hours>(local - day).count();
        ++card.counts[wd.c_encoding()][static_cast<size_t>(hour)];
    }
    return card;
}

std::vector<CommitRecord> parse_commits_csv(const std::string& text) {
    std::vector<CommitRecord> commits;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_number == 1 && line == "user,commit_id,timestamp") continue;
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw malformed_document("commits csv line " + std::to_string(line_number) +
                                     ": expected user,commit_id,timestamp");
        CommitRecord rec;
        rec.user = line.substr(0, c1);
        rec.commit_id = line.substr(c1 + 1, c2 - c1 - 1);
        auto ts = parse_rfc3339(line.substr(c2 + 1));
        if (!ts)
            throw malformed_document("commits csv line " + std::to_string(line_number) +
                                     ": bad timestamp");
        rec.timestamp = *ts;
        commits.push_back(std::move(rec));
    }
    return commits;
}

std::string format_commits_csv(const std::vector<CommitRecord>& commits) {
    std::string out = "user,commit_id,timestamp\n";
    for (const CommitRecord& c : commits)
        out += c.user + "," + c.commit_id + "," + format_rfc3339(c.timestamp) + "\n";
    return out;
}

std::vector<StuckUser> flag_stuck_users(const EventLog& log, Timestamp now,
                                        std::chrono::minutes stall_threshold,
                                        const std::vector<std::string>& task_ids) {
    using namespace std::chrono;
    if (stall_threshold <= minutes{0}) throw config_invalid("stall threshold must be positive");

    const int total = static_cast<int>(task_ids.size());
    std::vector<std::string> users = log.users();

    std::map<std::string, int> latest_score;
    for (const std::string& user : users) {
        auto series = log.progress_series(user);
        latest_score[user] = series.empty() ? -1 : series.back().second;
    }

    std::vector<StuckUser> stuck;
    for (const std::string& user : users) {
        auto series = log.progress_series(user);
        if (series.empty()) continue;
        int score = series.back().second;
        if (score >= total) continue; // completed

        // start of the trailing run of builds at this score
        size_t i = series.size();
        while (i > 0 && series[i - 1].second == score) --i;
        Timestamp stall_start = series[i].first;
        Timestamp last = series.back().first;

        std::vector<Timestamp> builds;
        builds.reserve(series.size());
        for (const auto& [ts, s] : series) builds.push_back(ts);

        seconds stalled = active_time(builds, stall_start, last);
        if (now > last) {
            seconds tail = now - last;
            stalled += tail <= minutes{60} ? tail : seconds{minutes{15}};
        }

        if (stalled < stall_threshold) continue;

        int solvers = 0;
        for (const auto& [other, other_score] : latest_score)
            if (other != user && other_score > score) ++solvers;

        StuckUser entry;
        entry.user = user;
        entry.task_index = static_cast<size_t>(score);
        entry.task_id = task_ids.at(entry.task_index);
        entry.stalled_minutes = duration<double>(stalled).count() / 60.0;
        entry.solver_count = solvers;
        stuck.push_back(std::move(entry));
    }
    return stuck;
}

} // namespace profci
