#pragma once

#include "profci/forge.hpp" // RetryPolicy
#include "profci/reporting.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace profci {

// HTTP ingestion wrapper around an EventLog. POST /events takes one
// progress-event object and answers 201 when appended, 200 when the
// (user, build_id) pair was already present; GET /events streams the log
// back as JSON lines. When a token is set, requests must carry
// "Authorization: Bearer <token>" or they are rejected with 401.
// Concurrent posts are accepted; appends are serialized internally.
class EventService {
public:
    explicit EventService(std::string token = {});
    ~EventService();

    // Loads existing events from the file and appends future ingests to
    // it (flushed per event).
    void attach_file(const std::filesystem::path& file);

    // Immutable copy for analytics, taken under the writer lock.
    EventLog snapshot() const;

    // Binds the host (port 0 = ephemeral) and serves on a background
    // thread until stop/destruction. Returns the bound port; throws
    // config_invalid when the port cannot be bound.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class PostOutcome { appended, duplicate };

// Posts one event to a remote /events endpoint. Connection failures and
// 5xx answers are retried per policy and then raise forge_unavailable;
// 401/403 raise auth_rejected immediately.
PostOutcome post_event(const std::string& endpoint_url, const std::string& token,
                       const ProgressEvent& event, const RetryPolicy& retry = {});

} // namespace profci
