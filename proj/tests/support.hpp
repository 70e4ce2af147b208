#pragma once

#include "profci/timeutil.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

namespace testsupport {

inline std::filesystem::path fixture_dir() { return PROFCI_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return PROFCI_GOLDEN_DIR; }
inline std::string profci_bin() { return PROFCI_BIN; }

// Fresh directory under the build tree, unique per call, removed lazily
// (left behind on failure for inspection).
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("profci-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::filesystem::create_directories(to);
    std::filesystem::copy(from, to,
                          std::filesystem::copy_options::recursive |
                              std::filesystem::copy_options::overwrite_existing);
}

inline profci::Timestamp ts(const std::string& rfc3339) {
    auto parsed = profci::parse_rfc3339(rfc3339);
    if (!parsed) throw std::runtime_error("bad test timestamp: " + rfc3339);
    return *parsed;
}

inline profci::Timestamp at_minutes(long m) {
    using namespace std::chrono;
    return profci::Timestamp{sys_days{year{2016} / 3 / 7}} + hours{9} + minutes{m};
}

} // namespace testsupport
