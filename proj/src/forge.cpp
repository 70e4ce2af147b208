#include "profci/forge.hpp"

#include "profci/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>
#include <thread>

namespace profci {

using nlohmann::json;

void validate_forge_config(const ForgeConfig& config) {
    static const std::regex repo_re("^[^/]+/[^/]+$");
    if (!std::regex_match(config.repository, repo_re))
        throw config_invalid("repository must be owner/name");
    if (config.base_url.empty()) throw config_invalid("forge base URL is empty");
}

std::string extract_marker(const std::string& body) {
    size_t start = body.rfind("<!-- profci:");
    if (start == std::string::npos) return "";
    size_t end = body.find("-->", start);
    if (end == std::string::npos) return "";
    return body.substr(start, end + 3 - start);
}

// --- FakeForge ---

std::set<std::string> FakeForge::list_open_issue_titles() {
    std::lock_guard lock(mutex_);
    std::set<std::string> titles;
    for (const Issue& issue : issues_)
        if (issue.state == IssueState::open) titles.insert(issue.title);
    return titles;
}

IssueRef FakeForge::apply_action(const ForgeAction& action) {
    if (action.body.empty()) throw config_invalid("forge action with empty body");
    std::lock_guard lock(mutex_);
    const std::string marker = extract_marker(action.body);

    if (action.kind == ForgeActionKind::comment_issue) {
        Issue* target = nullptr;
        for (Issue& issue : issues_) {
            if (issue.state != IssueState::open || issue.title != action.title) continue;
            if (!target || issue.number < target->number) target = &issue;
        }
        if (!target) throw missing_target_issue(action.title);
        bool seen = !marker.empty() &&
                    std::any_of(target->comments.begin(), target->comments.end(),
                                [&](const std::string& c) {
                                    return c.find(marker) != std::string::npos;
                                });
        if (!seen) target->comments.push_back(action.body);
        return IssueRef{target->number, target->title, target->state};
    }

    if (!marker.empty()) {
        for (const Issue& issue : issues_)
            if (issue.body.find(marker) != std::string::npos)
                return IssueRef{issue.number, issue.title, issue.state};
    }
    Issue issue;
    issue.number = next_number_++;
    issue.title = action.title;
    issue.body = action.body;
    issues_.push_back(issue);
    return IssueRef{issue.number, issue.title, issue.state};
}

IssueRef FakeForge::seed_issue(const std::string& title, const std::string& body,
                               IssueState state) {
    std::lock_guard lock(mutex_);
    Issue issue;
    issue.number = next_number_++;
    issue.title = title;
    issue.body = body;
    issue.state = state;
    issues_.push_back(issue);
    return IssueRef{issue.number, issue.title, issue.state};
}

bool FakeForge::comment_on(int number, const std::string& body) {
    std::lock_guard lock(mutex_);
    for (Issue& issue : issues_) {
        if (issue.number != number) continue;
        issue.comments.push_back(body);
        return true;
    }
    return false;
}

void FakeForge::close_issue(int number) {
    std::lock_guard lock(mutex_);
    for (Issue& issue : issues_)
        if (issue.number == number) issue.state = IssueState::closed;
}

void FakeForge::reopen_issue(int number) {
    std::lock_guard lock(mutex_);
    for (Issue& issue : issues_)
        if (issue.number == number) issue.state = IssueState::open;
}

std::vector<FakeForge::Issue> FakeForge::dump() const {
    std::lock_guard lock(mutex_);
    return issues_;
}

size_t FakeForge::open_issue_count_for_title(const std::string& title) const {
    std::lock_guard lock(mutex_);
    size_t n = 0;
    for (const Issue& issue : issues_)
        if (issue.state == IssueState::open && issue.title == title) ++n;
    return n;
}

} // namespace profci
