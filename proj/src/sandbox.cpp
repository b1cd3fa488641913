#include "sop/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "sop/errors.hpp"

extern char** environ;

namespace sop {

using nlohmann::json;

std::string_view to_string(ExecStatus status) {
    switch (status) {
        case ExecStatus::Ok: return "ok";
        case ExecStatus::Error: return "error";
        case ExecStatus::Timeout: return "timeout";
        case ExecStatus::Killed: return "killed";
    }
    return "?";
}

ExecStatus parse_exec_status(std::string_view text) {
    if (text == "ok") return ExecStatus::Ok;
    if (text == "error") return ExecStatus::Error;
    if (text == "timeout") return ExecStatus::Timeout;
    if (text == "killed") return ExecStatus::Killed;
    throw SandboxError("unknown execution status '" + std::string(text) + "'");
}

std::string frame(std::string_view payload) {
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(payload.size() + 4);
    out += static_cast<char>((n >> 24) & 0xFF);
    out += static_cast<char>((n >> 16) & 0xFF);
    out += static_cast<char>((n >> 8) & 0xFF);
    out += static_cast<char>(n & 0xFF);
    out += payload;
    return out;
}

std::optional<std::string> take_frame(std::string& buffer) {
    if (buffer.size() < 4) return std::nullopt;
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(buffer[i]);
    if (buffer.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    std::string payload = buffer.substr(4, n);
    buffer.erase(0, 4 + static_cast<std::size_t>(n));
    return payload;
}

namespace {

json parse_doc(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw SandboxError(std::string("malformed sandbox document: ") + e.what());
    }
}

void check_version(const json& doc) {
    const int v = doc.value("v", 0);
    if (v != kSandboxProtocolVersion)
        throw SandboxError("sandbox runner speaks protocol version " + std::to_string(v) +
                           "; this client requires version " +
                           std::to_string(kSandboxProtocolVersion));
}

}  // namespace

std::string encode_request(const ExecRequest& r) {
    return json{{"v", kSandboxProtocolVersion},
                {"code", r.code},
                {"timeout_ms", r.timeout_ms},
                {"memory_mb", r.memory_mb},
                {"max_points", r.max_points}}
        .dump();
}

ExecRequest decode_request(std::string_view text) {
    const json doc = parse_doc(text);
    check_version(doc);
    try {
        ExecRequest r;
        r.code = doc.at("code").get<std::string>();
        r.timeout_ms = doc.at("timeout_ms").get<int>();
        r.memory_mb = doc.at("memory_mb").get<int>();
        r.max_points = doc.at("max_points").get<int>();
        return r;
    } catch (const json::exception& e) {
        throw SandboxError(std::string("malformed request: ") + e.what());
    }
}

std::string encode_result(const ExecResult& r) {
    json points = json::array();
    for (const auto& p : r.points) points.push_back(p);
    return json{{"v", kSandboxProtocolVersion},
                {"status", to_string(r.status)},
                {"points", points},
                {"stdout_excerpt", r.stdout_excerpt},
                {"error_trace", r.error_trace}}
        .dump();
}

ExecResult decode_result(std::string_view text) {
    const json doc = parse_doc(text);
    check_version(doc);
    ExecResult r;
    try {
        r.status = parse_exec_status(doc.at("status").get<std::string>());
        for (const auto& p : doc.at("points")) r.points.push_back(p.get<Point>());
        r.stdout_excerpt = doc.value("stdout_excerpt", "");
        r.error_trace = doc.value("error_trace", "");
    } catch (const json::exception& e) {
        throw SandboxError(std::string("malformed result: ") + e.what());
    }
    if (r.status == ExecStatus::Ok) {
        if (r.points.empty()) throw SandboxError("runner reported ok without points");
        for (const auto& p : r.points)
            if (p.size() != 2 || !std::isfinite(p[0]) || !std::isfinite(p[1]))
                throw SandboxError("runner reported a point that is not a finite pair");
    }
    return r;
}

std::string encode_handshake_request() {
    return json{{"v", kSandboxProtocolVersion}, {"op", "handshake"}}.dump();
}

std::string encode_capabilities(const Capabilities& caps) {
    return json{{"v", caps.version}, {"allowlist", caps.allowlist}}.dump();
}

Capabilities decode_capabilities(std::string_view text) {
    const json doc = parse_doc(text);
    check_version(doc);
    Capabilities caps;
    caps.version = doc.at("v").get<int>();
    caps.allowlist = doc.value("allowlist", std::vector<std::string>{});
    return caps;
}

std::string describe_failure(const ExecResult& result, const ExecRequest& request) {
    switch (result.status) {
        case ExecStatus::Ok: return {};
        case ExecStatus::Error: return result.error_trace;
        case ExecStatus::Timeout:
            return "TimeoutError: the code did not finish within " +
                   std::to_string(request.timeout_ms) + " ms";
        case ExecStatus::Killed:
            return "MemoryError: the code was stopped after exceeding " +
                   std::to_string(request.memory_mb) + " MB";
    }
    return {};
}

namespace {

struct Cursor {
    std::string_view s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size()) {
            if (std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
            } else if (s[i] == '#') {
                while (i < s.size() && s[i] != '\n') ++i;
            } else {
                break;
            }
        }
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    std::optional<double> number() {
        skip();
        std::size_t j = i;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        const std::size_t digits = j;
        while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                                s[j] == 'e' || s[j] == 'E' ||
                                ((s[j] == '+' || s[j] == '-') && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
            ++j;
        if (j == digits) return std::nullopt;
        double v = 0.0;
        const char* first = s.data() + i + (s[i] == '+' ? 1 : 0);
        const auto res = std::from_chars(first, s.data() + j, v);
        if (res.ec != std::errc() || res.ptr != s.data() + j) return std::nullopt;
        i = j;
        return v;
    }
};

ExecResult stub_error(std::string message) {
    ExecResult r;
    r.status = ExecStatus::Error;
    r.error_trace = "SyntaxError: " + std::move(message) +
                    "\n(the stub sandbox accepts only next_points = [(x, y), ...] with numeric literals)";
    return r;
}

}  // namespace

ExecResult StubSandboxClient::execute(const ExecRequest& request) {
    Cursor c{request.code};
    c.skip();
    static constexpr std::string_view kName = "next_points";
    if (request.code.compare(c.i, kName.size(), kName) != 0)
        return stub_error("expected an assignment to next_points");
    c.i += kName.size();
    if (!c.eat('=')) return stub_error("expected '=' after next_points");
    if (!c.eat('[')) return stub_error("expected '['");
    std::vector<Point> points;
    c.skip();
    while (!c.eat(']')) {
        char close;
        if (c.eat('(')) {
            close = ')';
        } else if (c.eat('[')) {
            close = ']';
        } else {
            return stub_error("expected '(' at offset " + std::to_string(c.i));
        }
        Point p;
        for (int k = 0; k < 2; ++k) {
            auto v = c.number();
            if (!v) return stub_error("expected a number at offset " + std::to_string(c.i));
            if (!std::isfinite(*v)) return stub_error("coordinates must be finite");
            p.push_back(*v);
            if (k == 0 && !c.eat(',')) return stub_error("expected ',' between coordinates");
        }
        c.eat(',');
        if (!c.eat(close)) return stub_error("expected a pair of exactly two coordinates");
        points.push_back(std::move(p));
        if (!c.eat(',')) {
            if (!c.eat(']')) return stub_error("expected ',' or ']' at offset " + std::to_string(c.i));
            break;
        }
        c.skip();
    }
    c.skip();
    if (c.i != request.code.size()) return stub_error("unexpected text after the list");
    if (points.empty()) return stub_error("next_points is empty");

    ExecResult r;
    r.status = ExecStatus::Ok;
    if (request.max_points > 0 && static_cast<int>(points.size()) > request.max_points) {
        r.stdout_excerpt = "note: " + std::to_string(points.size() - request.max_points) +
                           " point(s) beyond max_points were dropped";
        points.resize(request.max_points);
    }
    r.points = std::move(points);
    return r;
}

ProcessSandboxClient::ProcessSandboxClient(std::vector<std::string> argv,
                                           std::chrono::milliseconds grace)
    : argv_(std::move(argv)), grace_(grace) {
    if (argv_.empty()) throw ConfigError("sandbox", "runner command is empty");
    // A runner that dies mid-request must surface as an error, not end the process.
    ::signal(SIGPIPE, SIG_IGN);
}

ProcessSandboxClient::~ProcessSandboxClient() { stop(); }

void ProcessSandboxClient::start() {
    int in_pipe[2], out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0)
        throw SandboxError(std::string("pipe: ") + std::strerror(errno));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<char*> args;
    for (auto& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    pid_t pid = -1;
    const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        throw SandboxError("cannot start sandbox runner '" + argv_[0] + "': " + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    pending_.clear();

    const auto doc = exchange(encode_handshake_request(), std::chrono::milliseconds(10000) + grace_);
    if (doc.empty()) {
        stop();
        throw SandboxError("sandbox runner did not answer the handshake");
    }
    auto caps = decode_capabilities(doc);
    if (caps_ && !(*caps_ == caps)) {
        stop();
        throw SandboxError("sandbox runner changed its capabilities after a restart");
    }
    caps_ = std::move(caps);
}

void ProcessSandboxClient::stop() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        kill(pid_, SIGKILL);
        waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
}

std::string ProcessSandboxClient::exchange(const std::string& payload,
                                           std::chrono::milliseconds deadline) {
    const std::string bytes = frame(payload);
    std::size_t written = 0;
    while (written < bytes.size()) {
        const auto n = ::write(to_child_, bytes.data() + written, bytes.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            stop();
            throw SandboxError("sandbox runner closed its input");
        }
        written += static_cast<std::size_t>(n);
    }
    const auto until = std::chrono::steady_clock::now() + deadline;
    for (;;) {
        if (auto doc = take_frame(pending_)) return *doc;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            until - std::chrono::steady_clock::now());
        if (left.count() <= 0) return {};
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) continue;
        char buf[65536];
        const auto n = ::read(from_child_, buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            stop();
            throw SandboxError("sandbox runner exited unexpectedly");
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
}

const Capabilities& ProcessSandboxClient::capabilities() {
    if (pid_ < 0) start();
    return *caps_;
}

ExecResult ProcessSandboxClient::execute(const ExecRequest& request) {
    if (pid_ < 0) start();
    const auto doc = exchange(encode_request(request),
                              std::chrono::milliseconds(request.timeout_ms) + grace_);
    if (doc.empty()) {
        // The runner missed its own deadline; replace it.
        stop();
        ExecResult r;
        r.status = ExecStatus::Timeout;
        return r;
    }
    return decode_result(doc);
}

}  // namespace sop
