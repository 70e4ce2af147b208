#include "profci/model.hpp"

#include "profci/errors.hpp"

#include <json.hpp>

#include <set>

namespace profci {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw schema_violation(path + "." + key, "missing");
    if (!obj[key].is_string()) throw schema_violation(path + "." + key, "expected string");
    return obj[key].get<std::string>();
}

std::vector<std::string> require_string_array(const json& obj, const std::string& key,
                                              const std::string& path) {
    if (!obj.contains(key)) throw schema_violation(path + "." + key, "missing");
    const json& arr = obj[key];
    if (!arr.is_array()) throw schema_violation(path + "." + key, "expected array of strings");
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string())
            throw schema_violation(path + "." + key + "[" + std::to_string(i) + "]",
                                   "expected string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

GivenWhenThen parse_gwt(const json& obj, const std::string& path) {
    GivenWhenThen gwt;
    gwt.given = require_string(obj, "given", path);
    gwt.when = require_string(obj, "when", path);
    gwt.then = require_string(obj, "then", path);
    if (trimmed(gwt.given).empty()) throw schema_violation(path + ".given", "empty clause");
    if (trimmed(gwt.when).empty()) throw schema_violation(path + ".when", "empty clause");
    if (trimmed(gwt.then).empty()) throw schema_violation(path + ".then", "empty clause");
    return gwt;
}

TaskDef parse_task(const json& obj, size_t index) {
    const std::string path = "tasks[" + std::to_string(index) + "]";
    if (!obj.is_object()) throw schema_violation(path, "expected object");

    TaskDef task;
    task.id = require_string(obj, "id", path);
    if (task.id.empty()) throw schema_violation(path + ".id", "empty");
    task.title = require_string(obj, "title", path);
    if (task.title.empty()) throw schema_violation(path + ".title", "empty");
    task.description = parse_gwt(obj, path);
    if (obj.contains("hints")) task.hints = require_string_array(obj, "hints", path);
    task.command = require_string_array(obj, "command", path);
    if (task.command.empty()) throw schema_violation(path + ".command", "empty command line");
    for (size_t i = 0; i < task.command.size(); ++i)
        if (task.command[i].empty())
            throw schema_violation(path + ".command[" + std::to_string(i) + "]", "empty string");
    return task;
}

} // namespace

std::string to_string(TaskStatus s) {
    switch (s) {
    case TaskStatus::pass: return "pass";
    case TaskStatus::fail: return "fail";
    case TaskStatus::error: return "error";
    }
    return "fail";
}

std::optional<TaskStatus> task_status_from_string(std::string_view s) {
    if (s == "pass") return TaskStatus::pass;
    if (s == "fail") return TaskStatus::fail;
    if (s == "error") return TaskStatus::error;
    return std::nullopt;
}

ExerciseManifest parse_manifest(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw malformed_document(e.what());
    }
    if (!doc.is_object()) throw malformed_document("top level is not an object");

    ExerciseManifest m;
    m.exercise_name = require_string(doc, "exercise_name", "$");

    if (!doc.contains("tasks")) throw schema_violation("$.tasks", "missing");
    if (!doc["tasks"].is_array()) throw schema_violation("$.tasks", "expected array");
    std::set<std::string> seen_ids;
    for (size_t i = 0; i < doc["tasks"].size(); ++i) {
        TaskDef task = parse_task(doc["tasks"][i], i);
        if (!seen_ids.insert(task.id).second)
            throw schema_violation("tasks[" + std::to_string(i) + "].id", "duplicate");
        m.tasks.push_back(std::move(task));
    }

    m.student_suite_command = require_string_array(doc, "student_suite_command", "$");
    if (m.student_suite_command.empty())
        throw schema_violation("$.student_suite_command", "empty command");
    for (size_t i = 0; i < m.student_suite_command.size(); ++i)
        if (m.student_suite_command[i].empty())
            throw schema_violation("$.student_suite_command[" + std::to_string(i) + "]",
                                   "empty string");

    if (doc.contains("completion_body_template"))
        m.completion_body_template = require_string(doc, "completion_body_template", "$");
    else
        m.completion_body_template =
            "Congratulations, you have completed the exercise!\n\n"
            "Please take a moment to fill out the feedback survey: {survey_url}\n";
    if (doc.contains("survey_url")) m.survey_url = require_string(doc, "survey_url", "$");
    if (doc.contains("report_endpoint") && !doc["report_endpoint"].is_null())
        m.report_endpoint = require_string(doc, "report_endpoint", "$");
    return m;
}

std::string serialize_manifest(const ExerciseManifest& manifest) {
    json tasks = json::array();
    for (const TaskDef& t : manifest.tasks) {
        tasks.push_back(json{{"id", t.id},
                             {"title", t.title},
                             {"given", t.description.given},
                             {"when", t.description.when},
                             {"then", t.description.then},
                             {"hints", t.hints},
                             {"command", t.command}});
    }
    json doc{{"exercise_name", manifest.exercise_name},
             {"tasks", std::move(tasks)},
             {"student_suite_command", manifest.student_suite_command},
             {"completion_body_template", manifest.completion_body_template},
             {"survey_url", manifest.survey_url}};
    if (!manifest.report_endpoint.empty()) doc["report_endpoint"] = manifest.report_endpoint;
    return doc.dump(2) + "\n";
}

std::optional<TaskResult> parse_result_line(std::string_view line, int line_number) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.substr(0, kResultSentinel.size()) != kResultSentinel) return std::nullopt;
    std::string_view payload = line.substr(kResultSentinel.size());

    json obj;
    try {
        obj = json::parse(payload);
    } catch (const json::parse_error& e) {
        throw malformed_result_line(line_number, e.what());
    }
    if (!obj.is_object()) throw malformed_result_line(line_number, "payload is not an object");

    auto str = [&](const char* key) -> std::string {
        if (!obj.contains(key) || !obj[key].is_string())
            throw malformed_result_line(line_number, std::string("missing string field '") + key +
                                                         "'");
        return obj[key].get<std::string>();
    };

    TaskResult r;
    r.id = str("id");
    if (r.id.empty()) throw malformed_result_line(line_number, "empty id");
    r.title = str("title");
    if (r.title.empty()) throw malformed_result_line(line_number, "empty title");

    auto status = task_status_from_string(str("status"));
    if (!status)
        throw malformed_result_line(line_number, "status must be pass, fail or error");
    r.status = *status;

    r.description.given = str("given");
    r.description.when = str("when");
    r.description.then = str("then");
    if (trimmed(r.description.given).empty() || trimmed(r.description.when).empty() ||
        trimmed(r.description.then).empty())
        throw malformed_result_line(line_number, "empty given/when/then clause");

    r.message = str("message");
    if (r.status == TaskStatus::pass && !r.message.empty())
        throw malformed_result_line(line_number, "pass result carries a message");
    if (r.status != TaskStatus::pass && r.message.empty())
        throw malformed_result_line(line_number, "failing result has no message");

    if (!obj.contains("hints") || !obj["hints"].is_array())
        throw malformed_result_line(line_number, "missing hints array");
    for (const auto& h : obj["hints"]) {
        if (!h.is_string()) throw malformed_result_line(line_number, "hint is not a string");
        r.hints.push_back(h.get<std::string>());
    }
    return r;
}

std::vector<TaskResult> parse_result_stream(const std::string& text) {
    std::vector<TaskResult> results;
    size_t pos = 0;
    int line_number = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line{text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos};
        ++line_number;
        if (auto r = parse_result_line(line, line_number)) results.push_back(std::move(*r));
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return results;
}

std::string format_result_line(const TaskResult& result) {
    json obj{{"id", result.id},
             {"title", result.title},
             {"status", to_string(result.status)},
             {"given", result.description.given},
             {"when", result.description.when},
             {"then", result.description.then},
             {"message", result.message},
             {"hints", result.hints}};
    return std::string(kResultSentinel) + obj.dump() + "\n";
}

} // namespace profci
