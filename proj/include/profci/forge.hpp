#pragma once

#include "profci/evaluator.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace profci {

enum class IssueState { open, closed };

struct IssueRef {
    int number = 0; // unique per repository, starting at 1
    std::string title;
    IssueState state = IssueState::open;
};

struct ForgeConfig {
    std::string base_url;   // e.g. "https://api.github.com"
    std::string repository; // "owner/name"
    std::string auth_token;
};

// Throws config_invalid unless repository matches owner/name.
void validate_forge_config(const ForgeConfig& config);

// The marker footer of an action body, empty when none is present.
std::string extract_marker(const std::string& body);

class ForgeClient {
public:
    virtual ~ForgeClient() = default;

    // Titles of all open issues, fully paginated.
    virtual std::set<std::string> list_open_issue_titles() = 0;

    // Creates or comments per the action's kind. Actions carrying a marker
    // already present on the forge are no-ops returning the existing ref.
    virtual IssueRef apply_action(const ForgeAction& action) = 0;
};

// In-memory stand-in for the forge used by tests and the simulator.
class FakeForge : public ForgeClient {
public:
    struct Issue {
        int number = 0;
        std::string title;
        IssueState state = IssueState::open;
        std::string body;
        std::vector<std::string> comments;

        bool operator==(const Issue&) const = default;
    };

    std::set<std::string> list_open_issue_titles() override;
    IssueRef apply_action(const ForgeAction& action) override;

    // Test and simulation hooks. seed_issue and comment_on are the raw
    // REST surface (no dedup); the HTTP server forwards to them so that
    // client-side idempotency is actually exercised.
    IssueRef seed_issue(const std::string& title, const std::string& body,
                        IssueState state = IssueState::open);
    bool comment_on(int number, const std::string& body);
    void close_issue(int number);
    void reopen_issue(int number);
    std::vector<Issue> dump() const; // snapshot of the whole repository

    size_t open_issue_count_for_title(const std::string& title) const;

private:
    mutable std::mutex mutex_;
    std::vector<Issue> issues_;
    int next_number_ = 1;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000}; // 1 s, 2 s, 4 s
    std::function<void(std::chrono::milliseconds)> sleeper; // test override
};

// Client for a GitHub-compatible REST issue tracker. forge_unavailable is
// retried per policy; auth_rejected is never retried.
class HttpForge : public ForgeClient {
public:
    explicit HttpForge(ForgeConfig config, RetryPolicy retry = {});
    ~HttpForge() override;

    std::set<std::string> list_open_issue_titles() override;
    IssueRef apply_action(const ForgeAction& action) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Serves a FakeForge over the same REST surface HttpForge speaks, for
// end-to-end tests of the CLI and the HTTP client.
class FakeForgeHttpServer {
public:
    // token empty = no auth required
    FakeForgeHttpServer(FakeForge& forge, std::string repository, std::string token = {});
    ~FakeForgeHttpServer();

    // Binds to 127.0.0.1 on an ephemeral port and serves on a background
    // thread until destruction. Returns the bound port.
    int start();
    void stop();
    std::string base_url() const;

    // Every request observed, for failure-injection tests.
    int request_count() const;
    // Fail the next n requests with 503.
    void inject_unavailable(int n);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace profci
