#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "lmoa/error.hpp"
#include "lmoa/oracle.hpp"
#include "lmoa/wire.hpp"

namespace lmoa {

namespace {

using nlohmann::json;

json parse_reply(const std::string& line, std::int64_t id)
{
    try {
        auto j = json::parse(line);
        if (!j.is_object() || !j.contains("type")) throw OracleError("reply has no type", id);
        return j;
    } catch (const json::exception&) {
        throw OracleError("malformed reply from oracle process: " + line.substr(0, 200), id);
    }
}

} // namespace

SubprocessOracle::SubprocessOracle(const std::string& command, std::size_t class_count, ImageShape shape,
                                   std::chrono::milliseconds timeout)
    : Oracle(class_count, shape), timeout_(timeout)
{
    // A dead child must show up as EPIPE on write, not kill the parent.
    ::signal(SIGPIPE, SIG_IGN);

    int down[2];
    int up[2];
    if (::pipe2(down, O_CLOEXEC) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(up, O_CLOEXEC) != 0) {
        ::close(down[0]);
        ::close(down[1]);
        throw TransportError(std::string("pipe: ") + std::strerror(errno));
    }

    pid_ = ::fork();
    if (pid_ < 0) {
        for (int fd : {down[0], down[1], up[0], up[1]})
            ::close(fd);
        throw TransportError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::setpgid(0, 0);
        ::dup2(down[0], STDIN_FILENO);
        ::dup2(up[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(down[0]);
    ::close(up[1]);
    to_child_ = down[1];
    from_child_ = up[0];

    try {
        send_line(wire::hello_line(shape), -1);
        const auto reply = parse_reply(read_line(-1), -1);
        const auto type = reply.at("type").get<std::string>();
        if (type == "error") throw OracleError("oracle refused handshake: " + reply.value("message", std::string()));
        if (type != "ready") throw OracleError("expected a ready reply, got '" + type + "'");
        const auto classes = reply.at("classes").get<std::size_t>();
        if (classes < 2) throw OracleError("oracle announced fewer than 2 classes");
        if (class_count != 0 && classes != class_count)
            throw OracleError("oracle announced " + std::to_string(classes) + " classes, expected " +
                              std::to_string(class_count));
        if (reply.contains("shape")) {
            const auto s = reply.at("shape").get<std::vector<std::size_t>>();
            if (s.size() != 3 || ImageShape{s[0], s[1], s[2]} != shape)
                throw OracleError("oracle announced a different image shape");
        }
        set_class_count(classes);
    } catch (const json::exception& e) {
        shutdown();
        throw OracleError(std::string("malformed handshake reply: ") + e.what());
    } catch (...) {
        shutdown();
        throw;
    }
}

SubprocessOracle::~SubprocessOracle()
{
    shutdown();
}

void SubprocessOracle::shutdown() noexcept
{
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ <= 0) return;

    // Closing stdin asks the child to exit; give it a moment before killing.
    for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) != 0) {
            pid_ = -1;
            return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    // The whole group, so a shell wrapper's children go too.
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
}

void SubprocessOracle::send_line(const std::string& line, std::int64_t query_id)
{
    std::size_t done = 0;
    while (done < line.size()) {
        const auto n = ::write(to_child_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("write to oracle process failed: ") + std::strerror(errno), query_id);
        }
        done += static_cast<std::size_t>(n);
    }
}

std::string SubprocessOracle::read_line(std::int64_t query_id)
{
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            auto line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) throw TransportError("oracle process timed out", query_id);

        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("poll failed: ") + std::strerror(errno), query_id);
        }
        if (ready == 0) throw TransportError("oracle process timed out", query_id);

        char chunk[65536];
        const auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("read from oracle process failed: ") + std::strerror(errno), query_id);
        }
        if (n == 0) throw TransportError("oracle process closed its output", query_id);
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<double> SubprocessOracle::do_classify(const ImageTensor& image, std::uint64_t query_number)
{
    std::lock_guard lock(mutex_);
    const auto id = static_cast<std::int64_t>(query_number);
    if (to_child_ < 0) throw TransportError("oracle process is not running", id);

    send_line(wire::query_line(id, image), id);
    const auto reply = parse_reply(read_line(id), id);
    try {
        const auto type = reply.at("type").get<std::string>();
        if (type == "error") throw OracleError("oracle error: " + reply.value("message", std::string()), id);
        if (type != "probs") throw OracleError("expected a probs reply, got '" + type + "'", id);
        if (reply.at("id").get<std::int64_t>() != id)
            throw OracleError("reply id " + std::to_string(reply.at("id").get<std::int64_t>()) +
                                  " does not match query id " + std::to_string(id),
                              id);
        return reply.at("probs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw OracleError(std::string("malformed probs reply: ") + e.what(), id);
    }
}

std::unique_ptr<SubprocessOracle> spawn_subprocess_oracle(const std::string& command, std::size_t class_count,
                                                          ImageShape shape)
{
    return std::make_unique<SubprocessOracle>(command, class_count, shape);
}

} // namespace lmoa
