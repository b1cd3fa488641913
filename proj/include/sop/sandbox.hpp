#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sop/world.hpp"

namespace sop {

inline constexpr int kSandboxProtocolVersion = 1;

enum class ExecStatus { Ok, Error, Timeout, Killed };
std::string_view to_string(ExecStatus status);
ExecStatus parse_exec_status(std::string_view text);

struct ExecRequest {
    std::string code;
    int timeout_ms = 10000;
    int memory_mb = 512;
    int max_points = 1000;
};

struct ExecResult {
    ExecStatus status = ExecStatus::Error;
    std::vector<Point> points;  ///< non-empty finite pairs when Ok
    std::string stdout_excerpt;
    std::string error_trace;
};

struct Capabilities {
    int version = 0;
    std::vector<std::string> allowlist;

    bool operator==(const Capabilities&) const = default;
};

// Wire format: a 4-byte big-endian payload length followed by a compact JSON
// document with sorted keys.
std::string frame(std::string_view payload);
/// Removes one complete frame from the front of `buffer`, if present.
std::optional<std::string> take_frame(std::string& buffer);

std::string encode_request(const ExecRequest& request);
ExecRequest decode_request(std::string_view json_text);
std::string encode_result(const ExecResult& result);
/// Throws SandboxError on malformed documents or a version mismatch.
ExecResult decode_result(std::string_view json_text);
std::string encode_handshake_request();
std::string encode_capabilities(const Capabilities& caps);
Capabilities decode_capabilities(std::string_view json_text);

/// Turns a failed execution into the trace shown to the agent.
std::string describe_failure(const ExecResult& result, const ExecRequest& request);

class SandboxClient {
public:
    virtual ~SandboxClient() = default;
    virtual ExecResult execute(const ExecRequest& request) = 0;
};

/// In-process stand-in that accepts only a literal assignment
/// `next_points = [(x, y), ...]`. Anything else is an Error result.
class StubSandboxClient final : public SandboxClient {
public:
    ExecResult execute(const ExecRequest& request) override;
};

/// Talks to an external runner over its stdin/stdout. The runner is started
/// lazily, handshaken once, and restarted after a timeout or crash.
class ProcessSandboxClient final : public SandboxClient {
public:
    /// `grace` is added to each request's own timeout before the client gives
    /// up on the runner and kills it.
    explicit ProcessSandboxClient(std::vector<std::string> argv,
                                  std::chrono::milliseconds grace = std::chrono::milliseconds(5000));
    ~ProcessSandboxClient() override;
    ProcessSandboxClient(const ProcessSandboxClient&) = delete;
    ProcessSandboxClient& operator=(const ProcessSandboxClient&) = delete;

    ExecResult execute(const ExecRequest& request) override;
    /// Starts the runner if needed and returns its capability document.
    const Capabilities& capabilities();

private:
    void start();
    void stop();
    std::string exchange(const std::string& payload, std::chrono::milliseconds deadline);

    std::vector<std::string> argv_;
    std::chrono::milliseconds grace_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;
    std::optional<Capabilities> caps_;
};

}  // namespace sop
