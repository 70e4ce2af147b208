#include "profci/event_service.hpp"

#include "profci/errors.hpp"

#include <httplib.h>

#include <mutex>
#include <thread>

namespace profci {

// --- EventService ---

struct EventService::Impl {
    std::string token;
    mutable std::mutex mutex; // single writer; snapshots copy under it
    EventLog log;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";
    int port = 0;

    explicit Impl(std::string tok) : token(std::move(tok)) {}

    bool authorized(const httplib::Request& req) const {
        if (token.empty()) return true;
        return req.get_header_value("Authorization") == "Bearer " + token;
    }

    void setup_routes() {
        // Default options include SO_REUSEPORT, under which a second
        // instance binding the same port would silently split the traffic.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
                         static_cast<socklen_t>(sizeof(yes)));
        });

        server.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req)) {
                res.status = 401;
                res.set_content("{\"message\":\"bad credentials\"}", "application/json");
                return;
            }
            ProgressEvent event;
            try {
                event = parse_event_line(req.body, 1);
            } catch (const malformed_document&) {
                res.status = 400;
                res.set_content("{\"message\":\"malformed event\"}", "application/json");
                return;
            }
            IngestResult outcome;
            try {
                std::lock_guard lock(mutex);
                outcome = log.ingest(event);
            } catch (const storage_failure&) {
                res.status = 500;
                res.set_content("{\"message\":\"storage failure\"}", "application/json");
                return;
            }
            res.status = outcome == IngestResult::appended ? 201 : 200;
            res.set_content("{}", "application/json");
        });

        server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req)) {
                res.status = 401;
                res.set_content("{\"message\":\"bad credentials\"}", "application/json");
                return;
            }
            std::string body;
            {
                std::lock_guard lock(mutex);
                for (const ProgressEvent& e : log.events()) body += format_event_line(e);
            }
            res.set_content(body, "application/x-ndjson");
        });
    }
};

EventService::EventService(std::string token) : impl_(std::make_unique<Impl>(std::move(token))) {
    impl_->setup_routes();
}

EventService::~EventService() { stop(); }

void EventService::attach_file(const std::filesystem::path& file) {
    std::lock_guard lock(impl_->mutex);
    if (std::filesystem::exists(file)) impl_->log = EventLog::load(file);
    impl_->log.attach_file(file);
}

EventLog EventService::snapshot() const {
    std::lock_guard lock(impl_->mutex);
    EventLog copy = impl_->log;
    return copy;
}

int EventService::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
        if (impl_->port <= 0) throw config_invalid("cannot bind " + host);
    } else {
        if (!impl_->server.bind_to_port(host, port))
            throw config_invalid("cannot bind " + host + ":" + std::to_string(port));
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void EventService::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string EventService::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

// --- post_event ---

namespace {

struct SplitUrl {
    std::string origin;
    std::string path;
};

SplitUrl split_endpoint(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw config_invalid("event endpoint URL has no scheme");
    size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, "/events"};
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

PostOutcome post_event(const std::string& endpoint_url, const std::string& token,
                       const ProgressEvent& event, const RetryPolicy& retry) {
    SplitUrl url = split_endpoint(endpoint_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    const std::string body = format_event_line(event);
    int attempt = 0;
    for (;;) {
        httplib::Result res = client.Post(url.path, headers, body, "application/json");
        if (res) {
            if (res->status == 201) return PostOutcome::appended;
            if (res->status == 200) return PostOutcome::duplicate;
            if (res->status == 401 || res->status == 403)
                throw auth_rejected("event endpoint: HTTP " + std::to_string(res->status));
            if (res->status < 500)
                throw error("event endpoint rejected the event: HTTP " +
                            std::to_string(res->status));
        }
        if (attempt >= retry.max_retries) {
            throw forge_unavailable(
                "event endpoint " +
                (res ? "answered HTTP " + std::to_string(res->status) : "connection failed"));
        }
        auto delay = retry.backoff_base * (1 << attempt);
        if (retry.sleeper)
            retry.sleeper(delay);
        else
            std::this_thread::sleep_for(delay);
        ++attempt;
    }
}

} // namespace profci
