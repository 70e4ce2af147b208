#pragma once

#include <stdexcept>
#include <string>

namespace profci {

// Base for all engine errors so callers can catch everything at once.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// --- manifest / result interchange ---

class malformed_document : public error {
public:
    explicit malformed_document(const std::string& what)
        : error("malformed document: " + what) {}
};

class schema_violation : public error {
public:
    schema_violation(const std::string& path, const std::string& what)
        : error("schema violation at " + path + ": " + what), path_(path) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class malformed_result_line : public error {
public:
    malformed_result_line(int line_number, const std::string& what)
        : error("malformed result line " + std::to_string(line_number) + ": " + what),
          line_number_(line_number) {}

    int line_number() const { return line_number_; }

private:
    int line_number_;
};

// --- subprocess / runner ---

class spawn_failure : public error {
public:
    explicit spawn_failure(const std::string& what)
        : error("spawn failure: " + what) {}
};

class timeout_exceeded : public error {
public:
    timeout_exceeded(const std::string& what, std::string captured)
        : error(what), captured_output_(std::move(captured)) {}

    const std::string& captured_output() const { return captured_output_; }

private:
    std::string captured_output_;
};

// --- evaluator ---

class pattern_invalid : public error {
public:
    explicit pattern_invalid(const std::string& what)
        : error("invalid pattern: " + what) {}
};

// --- forge ---

// A remote dependency (forge or event endpoint) cannot be reached or
// answered 5xx; transient, so callers retry before giving up.
class forge_unavailable : public error {
public:
    explicit forge_unavailable(const std::string& what)
        : error("service unavailable: " + what) {}
};

class auth_rejected : public error {
public:
    explicit auth_rejected(const std::string& what)
        : error("authentication rejected: " + what) {}
};

class missing_target_issue : public error {
public:
    explicit missing_target_issue(const std::string& title)
        : error("no open issue titled \"" + title + "\" to comment on") {}
};

// --- reporting ---

class storage_failure : public error {
public:
    explicit storage_failure(const std::string& what)
        : error("storage failure: " + what) {}
};

class bounds_not_builds : public error {
public:
    explicit bounds_not_builds(const std::string& what)
        : error("bounds not builds: " + what) {}
};

class inconsistent_log : public error {
public:
    explicit inconsistent_log(const std::string& what)
        : error("inconsistent log: " + what) {}
};

class unsupported_combination : public error {
public:
    explicit unsupported_combination(const std::string& what)
        : error("unsupported combination: " + what) {}
};

// --- simulator / cli ---

class config_invalid : public error {
public:
    explicit config_invalid(const std::string& what)
        : error("invalid configuration: " + what) {}
};

} // namespace profci
