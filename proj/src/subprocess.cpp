#include "profci/subprocess.hpp"

#include "profci/errors.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace profci {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};

    Pipe() {
        if (::pipe(fds) != 0) throw spawn_failure(std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

void append_bounded(std::string& buffer, const char* data, size_t n, bool& truncated) {
    buffer.append(data, n);
    if (buffer.size() > kOutputCap) {
        buffer.erase(0, buffer.size() - kOutputCap);
        truncated = true;
    }
}

std::string finalize_output(std::string buffer, bool truncated) {
    if (!truncated) return buffer;
    const size_t keep = kOutputCap - kTruncationNotice.size();
    if (buffer.size() > keep) buffer.erase(0, buffer.size() - keep);
    return std::string(kTruncationNotice) + buffer;
}

} // namespace

CommandResult run_command(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir,
                          std::chrono::duration<double> timeout,
                          const std::vector<std::pair<std::string, std::string>>& extra_env) {
    using clock = std::chrono::steady_clock;
    if (argv.empty()) throw spawn_failure("empty command line");

    Pipe out;
    Pipe err_report; // carries exec errno back to the parent
    ::fcntl(err_report.fds[1], F_SETFD, FD_CLOEXEC);

    const auto start = clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw spawn_failure(std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        ::setpgid(0, 0);
        out.close_read();
        err_report.close_read();
        ::dup2(out.fds[1], STDOUT_FILENO);
        ::dup2(out.fds[1], STDERR_FILENO);
        out.close_write();

        if (::chdir(workdir.c_str()) != 0) {
            int e = errno;
            (void)!::write(err_report.fds[1], &e, sizeof e);
            ::_exit(127);
        }
        for (const auto& [key, value] : extra_env) ::setenv(key.c_str(), value.c_str(), 1);

        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        int e = errno;
        (void)!::write(err_report.fds[1], &e, sizeof e);
        ::_exit(127);
    }

    ::setpgid(pid, pid); // also from the parent: closes the race with exec
    out.close_write();
    err_report.close_write();

    CommandResult result;
    std::string buffer;
    bool truncated = false;
    const auto deadline = start + std::chrono::duration_cast<clock::duration>(timeout);

    int exec_errno = 0;
    bool spawn_ok = true;
    char chunk[4096];

    bool out_open = true, err_open = true;
    while (out_open || err_open) {
        auto now = clock::now();
        int wait_ms = -1;
        if (now >= deadline) {
            wait_ms = 0;
        } else {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
            wait_ms = static_cast<int>(std::min<long long>(left.count() + 1, 60'000));
        }

        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out.fds[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_report.fds[0], POLLIN, 0};

        int rc = ::poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            // deadline hit
            if (::killpg(pid, SIGKILL) != 0 && errno != ESRCH) {
                throw timeout_exceeded("timed out and the process group could not be killed",
                                       finalize_output(std::move(buffer), truncated));
            }
            result.timed_out = true;
            break;
        }
        for (nfds_t i = 0; i < nfds; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            if (fds[i].fd == out.fds[0]) {
                ssize_t n = ::read(out.fds[0], chunk, sizeof chunk);
                if (n > 0)
                    append_bounded(buffer, chunk, static_cast<size_t>(n), truncated);
                else
                    out_open = false;
            } else {
                ssize_t n = ::read(err_report.fds[0], &exec_errno, sizeof exec_errno);
                if (n == sizeof exec_errno) spawn_ok = false;
                err_open = false;
            }
        }
    }

    // Pick up whatever was still in flight when the loop ended.
    ::fcntl(out.fds[0], F_SETFL, O_NONBLOCK);
    for (;;) {
        ssize_t n = ::read(out.fds[0], chunk, sizeof chunk);
        if (n <= 0) break;
        append_bounded(buffer, chunk, static_cast<size_t>(n), truncated);
    }

    int status = 0;
    if (result.timed_out) {
        ::waitpid(pid, &status, 0);
    } else {
        // Output pipes can close while the child keeps running; the
        // deadline still applies to process exit.
        for (;;) {
            pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (w < 0 && errno != EINTR) break;
            if (clock::now() >= deadline) {
                if (::killpg(pid, SIGKILL) != 0 && errno != ESRCH)
                    throw timeout_exceeded("timed out and the process group could not be killed",
                                           finalize_output(std::move(buffer), truncated));
                result.timed_out = true;
                ::waitpid(pid, &status, 0);
                break;
            }
            ::usleep(2000);
        }
    }
    result.duration = clock::now() - start;
    result.output = finalize_output(std::move(buffer), truncated);

    if (!spawn_ok)
        throw spawn_failure(argv[0] + ": " + std::strerror(exec_errno));

    if (result.timed_out)
        result.exit_status = 128 + SIGKILL;
    else if (WIFEXITED(status))
        result.exit_status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_status = 128 + WTERMSIG(status);
    return result;
}

} // namespace profci
