#include "profci/errors.hpp"
#include "profci/forge.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

namespace profci {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string origin;      // scheme://host[:port]
    std::string path_prefix; // "" or "/api/v3"
};

SplitUrl split_base_url(const std::string& base_url) {
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw config_invalid("forge base URL has no scheme");
    size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, ""};
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

// --- HttpForge ---

struct HttpForge::Impl {
    ForgeConfig config;
    RetryPolicy retry;
    SplitUrl url;
    httplib::Client client;

    Impl(ForgeConfig cfg, RetryPolicy rp)
        : config(std::move(cfg)), retry(std::move(rp)), url(split_base_url(config.base_url)),
          client(url.origin) {
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(30, 0);
        if (!config.auth_token.empty())
            client.set_default_headers({{"Authorization", "token " + config.auth_token}});
    }

    void sleep_for(std::chrono::milliseconds d) {
        if (retry.sleeper)
            retry.sleeper(d);
        else
            std::this_thread::sleep_for(d);
    }

    template <typename Fn> auto with_retry(Fn&& fn) {
        int attempt = 0;
        for (;;) {
            try {
                return fn();
            } catch (const forge_unavailable&) {
                if (attempt >= retry.max_retries) throw;
                sleep_for(retry.backoff_base * (1 << attempt));
                ++attempt;
            }
        }
    }

    // Maps an httplib result to the error contract; returns the body.
    std::string checked(const httplib::Result& res, const std::string& what) {
        if (!res) throw forge_unavailable(what + ": connection failed");
        if (res->status == 401 || res->status == 403)
            throw auth_rejected(what + ": HTTP " + std::to_string(res->status));
        if (res->status >= 500)
            throw forge_unavailable(what + ": HTTP " + std::to_string(res->status));
        if (res->status >= 400)
            throw error("forge request failed: " + what + ": HTTP " +
                        std::to_string(res->status));
        return res->body;
    }

    std::string repo_path(const std::string& tail) const {
        return url.path_prefix + "/repos/" + config.repository + tail;
    }

    struct OpenIssue {
        int number;
        std::string title;
        std::string body;
    };

    std::vector<OpenIssue> list_open_issues() {
        std::vector<OpenIssue> issues;
        for (int page = 1;; ++page) {
            std::string path = repo_path("/issues?state=open&per_page=100&page=" +
                                         std::to_string(page));
            std::string body = checked(client.Get(path), "GET issues");
            json arr;
            try {
                arr = json::parse(body);
            } catch (const json::parse_error& e) {
                throw error(std::string("forge returned unparseable issue list: ") + e.what());
            }
            if (!arr.is_array()) throw error("forge issue list is not an array");
            for (const json& item : arr) {
                if (item.value("state", "open") != "open") continue;
                issues.push_back(OpenIssue{item.value("number", 0), item.value("title", ""),
                                           item.value("body", "")});
            }
            if (arr.size() < 100) break;
        }
        return issues;
    }

    std::vector<std::string> list_comment_bodies(int number) {
        std::string body = checked(
            client.Get(repo_path("/issues/" + std::to_string(number) + "/comments")),
            "GET comments");
        json arr = json::parse(body, nullptr, false);
        std::vector<std::string> out;
        if (arr.is_array())
            for (const json& item : arr) out.push_back(item.value("body", ""));
        return out;
    }

    IssueRef create_issue(const ForgeAction& action) {
        json payload{{"title", action.title}, {"body", action.body}};
        std::string body = checked(
            client.Post(repo_path("/issues"), payload.dump(), "application/json"),
            "POST issue");
        json obj = json::parse(body, nullptr, false);
        return IssueRef{obj.is_object() ? obj.value("number", 0) : 0, action.title,
                        IssueState::open};
    }
};

HttpForge::HttpForge(ForgeConfig config, RetryPolicy retry) {
    validate_forge_config(config);
    impl_ = std::make_unique<Impl>(std::move(config), std::move(retry));
}

HttpForge::~HttpForge() = default;

std::set<std::string> HttpForge::list_open_issue_titles() {
    return impl_->with_retry([&] {
        std::set<std::string> titles;
        for (const auto& issue : impl_->list_open_issues()) titles.insert(issue.title);
        return titles;
    });
}

IssueRef HttpForge::apply_action(const ForgeAction& action) {
    return impl_->with_retry([&]() -> IssueRef {
        const std::string marker = extract_marker(action.body);

        if (action.kind == ForgeActionKind::comment_issue) {
            const Impl::OpenIssue* target = nullptr;
            auto issues = impl_->list_open_issues();
            for (const auto& issue : issues) {
                if (issue.title != action.title) continue;
                if (!target || issue.number < target->number) target = &issue;
            }
            if (!target) throw missing_target_issue(action.title);
            if (!marker.empty()) {
                for (const std::string& c : impl_->list_comment_bodies(target->number))
                    if (c.find(marker) != std::string::npos)
                        return IssueRef{target->number, target->title, IssueState::open};
            }
            json payload{{"body", action.body}};
            impl_->checked(
                impl_->client.Post(
                    impl_->repo_path("/issues/" + std::to_string(target->number) + "/comments"),
                    payload.dump(), "application/json"),
                "POST comment");
            return IssueRef{target->number, target->title, IssueState::open};
        }

        if (!marker.empty()) {
            for (const auto& issue : impl_->list_open_issues())
                if (issue.body.find(marker) != std::string::npos)
                    return IssueRef{issue.number, issue.title, IssueState::open};
        }
        return impl_->create_issue(action);
    });
}

// --- FakeForgeHttpServer ---

struct FakeForgeHttpServer::Impl {
    FakeForge& forge;
    std::string repository;
    std::string token;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    std::atomic<int> fail_next{0};

    Impl(FakeForge& f, std::string repo, std::string tok)
        : forge(f), repository(std::move(repo)), token(std::move(tok)) {}

    bool authorized(const httplib::Request& req) const {
        if (token.empty()) return true;
        return req.get_header_value("Authorization") == "token " + token;
    }

    void setup_routes() {
        server.set_pre_routing_handler([this](const httplib::Request&, httplib::Response& res) {
            ++requests;
            int expected = fail_next.load();
            while (expected > 0) {
                if (fail_next.compare_exchange_weak(expected, expected - 1)) {
                    res.status = 503;
                    res.set_content("{\"message\":\"service unavailable\"}", "application/json");
                    return httplib::Server::HandlerResponse::Handled;
                }
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });

        const std::string issues_pat = R"(/repos/([^/]+)/([^/]+)/issues)";
        const std::string comments_pat = R"(/repos/([^/]+)/([^/]+)/issues/(\d+)/comments)";

        server.Get(issues_pat, [this](const httplib::Request& req, httplib::Response& res) {
            if (!check(req, res)) return;
            int per_page = std::max(1, atoi_or(req.get_param_value("per_page"), 30));
            int page = std::max(1, atoi_or(req.get_param_value("page"), 1));
            std::string state = req.get_param_value("state");
            if (state.empty()) state = "open";

            json arr = json::array();
            auto issues = forge.dump();
            std::vector<const FakeForge::Issue*> filtered;
            for (const auto& issue : issues) {
                bool open = issue.state == IssueState::open;
                if (state == "all" || (state == "open" && open) ||
                    (state == "closed" && !open))
                    filtered.push_back(&issue);
            }
            size_t begin = static_cast<size_t>(page - 1) * static_cast<size_t>(per_page);
            for (size_t i = begin; i < filtered.size() && i < begin + per_page; ++i) {
                arr.push_back(json{
                    {"number", filtered[i]->number},
                    {"title", filtered[i]->title},
                    {"state", filtered[i]->state == IssueState::open ? "open" : "closed"},
                    {"body", filtered[i]->body}});
            }
            res.set_content(arr.dump(), "application/json");
        });

        server.Post(issues_pat, [this](const httplib::Request& req, httplib::Response& res) {
            if (!check(req, res)) return;
            json payload = json::parse(req.body, nullptr, false);
            if (!payload.is_object() || !payload.contains("title")) {
                res.status = 422;
                return;
            }
            IssueRef ref =
                forge.seed_issue(payload.value("title", ""), payload.value("body", ""));
            res.status = 201;
            res.set_content(json{{"number", ref.number},
                                 {"title", ref.title},
                                 {"state", "open"},
                                 {"body", payload.value("body", "")}}
                                .dump(),
                            "application/json");
        });

        server.Get(comments_pat, [this](const httplib::Request& req, httplib::Response& res) {
            if (!check(req, res)) return;
            int number = atoi_or(req.matches[3].str(), 0);
            json arr = json::array();
            int id = 1;
            for (const auto& issue : forge.dump()) {
                if (issue.number != number) continue;
                for (const std::string& body : issue.comments)
                    arr.push_back(json{{"id", id++}, {"body", body}});
                res.set_content(arr.dump(), "application/json");
                return;
            }
            res.status = 404;
        });

        server.Post(comments_pat, [this](const httplib::Request& req, httplib::Response& res) {
            if (!check(req, res)) return;
            int number = atoi_or(req.matches[3].str(), 0);
            json payload = json::parse(req.body, nullptr, false);
            std::string body = payload.is_object() ? payload.value("body", "") : "";
            if (forge.comment_on(number, body)) {
                res.status = 201;
                res.set_content(json{{"id", 1}, {"body", body}}.dump(), "application/json");
            } else {
                res.status = 404;
            }
        });
    }

    static int atoi_or(const std::string& s, int fallback) {
        if (s.empty()) return fallback;
        try {
            return std::stoi(s);
        } catch (...) {
            return fallback;
        }
    }

    bool check(const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req)) {
            res.status = 401;
            res.set_content("{\"message\":\"bad credentials\"}", "application/json");
            return false;
        }
        if (req.matches.size() >= 3 &&
            req.matches[1].str() + "/" + req.matches[2].str() != repository) {
            res.status = 404;
            res.set_content("{\"message\":\"not found\"}", "application/json");
            return false;
        }
        return true;
    }
};

FakeForgeHttpServer::FakeForgeHttpServer(FakeForge& forge, std::string repository,
                                         std::string token)
    : impl_(std::make_unique<Impl>(forge, std::move(repository), std::move(token))) {
    impl_->setup_routes();
}

FakeForgeHttpServer::~FakeForgeHttpServer() { stop(); }

int FakeForgeHttpServer::start() {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void FakeForgeHttpServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string FakeForgeHttpServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

int FakeForgeHttpServer::request_count() const { return impl_->requests.load(); }

void FakeForgeHttpServer::inject_unavailable(int n) { impl_->fail_next = n; }

} // namespace profci
