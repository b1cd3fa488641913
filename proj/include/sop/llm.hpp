#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace sop {

enum class ChatRole { System, User, Assistant };
std::string_view to_string(ChatRole role);
ChatRole parse_chat_role(std::string_view text);

struct ChatMessage {
    ChatRole role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

using Conversation = std::vector<ChatMessage>;

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    bool estimated = false;  ///< at least one count came from the chars/4 fallback

    std::int64_t total() const noexcept { return prompt_tokens + completion_tokens; }
    Usage& operator+=(const Usage& other) noexcept {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        estimated = estimated || other.estimated;
        return *this;
    }
    friend Usage operator+(Usage a, const Usage& b) noexcept { return a += b; }
    bool operator==(const Usage&) const = default;
};

struct Completion {
    std::string reply;
    Usage usage;
};

/// Chat-completion endpoint. Implementations are safe for concurrent use.
class ChatEndpoint {
public:
    virtual ~ChatEndpoint() = default;
    /// Requires a non-empty conversation that starts with a System message.
    virtual Completion complete(const Conversation& conversation) = 0;
};

/// Throws std::invalid_argument unless the conversation is well formed.
void check_conversation(const Conversation& conversation);

/// Unicode code points, not bytes.
std::size_t character_count(std::string_view text);
/// ceil(characters / 4), flagged as estimated.
Usage estimate_usage(const Conversation& conversation, std::string_view reply);

Usage sum_usage(std::span<const Usage> usages);

/// scheme_total / baseline_total rounded to two decimals.
double normalize_cost(std::int64_t scheme_total, std::int64_t baseline_total);

struct EndpointConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model_name = "gpt-4-32k";
    double temperature = 0.7;
    int max_reply_tokens = 2048;
    std::chrono::milliseconds request_timeout{120000};
    int max_retries = 5;
    int max_inflight = 4;
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_cap{30000};

    void validate() const;
};

/// Replies with a fixed script, one entry per call, in order. Throws
/// EndpointFailure once the script is exhausted.
class ScriptedEndpoint final : public ChatEndpoint {
public:
    explicit ScriptedEndpoint(std::vector<std::string> replies);
    Completion complete(const Conversation& conversation) override;
    std::size_t calls() const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

/// Endpoint backed by a callable; used by policy mocks and tests.
class FunctionEndpoint final : public ChatEndpoint {
public:
    using Fn = std::function<std::string(const Conversation&)>;
    explicit FunctionEndpoint(Fn fn) : fn_(std::move(fn)) {}
    Completion complete(const Conversation& conversation) override;

private:
    std::mutex mu_;
    Fn fn_;
};

/// Hex SHA-256 of the canonical JSON form of a conversation.
std::string conversation_key(const Conversation& conversation);

/// Forwards to `inner` and stores each exchange as <dir>/<key>.json.
class RecordingEndpoint final : public ChatEndpoint {
public:
    RecordingEndpoint(std::shared_ptr<ChatEndpoint> inner, std::filesystem::path dir);
    Completion complete(const Conversation& conversation) override;

private:
    std::shared_ptr<ChatEndpoint> inner_;
    std::filesystem::path dir_;
    std::mutex mu_;
};

/// Serves exchanges stored by RecordingEndpoint; never touches the network.
/// A missing key throws EndpointFailure naming the key.
class ReplayEndpoint final : public ChatEndpoint {
public:
    explicit ReplayEndpoint(std::filesystem::path dir);
    Completion complete(const Conversation& conversation) override;

private:
    std::filesystem::path dir_;
};

/// Bounds the number of concurrent holders.
class InflightLimiter {
public:
    explicit InflightLimiter(int limit) : free_(limit) {}
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
};

/// OpenAI-compatible /chat/completions client with retries and an in-flight cap.
class HttpChatEndpoint final : public ChatEndpoint {
public:
    /// The API key is read from config.api_key_env; it may be unset for local servers.
    explicit HttpChatEndpoint(EndpointConfig config);
    Completion complete(const Conversation& conversation) override;

    /// Attempts made by the most recent complete() call on this thread.
    static int last_attempts() noexcept;

private:
    EndpointConfig config_;
    std::string api_key_;
    InflightLimiter limiter_;
    std::mutex rng_mu_;
    std::uint64_t jitter_state_;
};

/// Request body for /chat/completions.
std::string chat_request_body(const Conversation& conversation, const EndpointConfig& config);

}  // namespace sop
