#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "sop/errors.hpp"
#include "sop/llm.hpp"

namespace sop {

namespace {

thread_local int g_last_attempts = 0;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path, no trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint.base_url", "expected scheme://host[:port][/path]");
    const auto path_begin = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_begin);
    out.prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config)
    : config_(std::move(config)),
      limiter_(std::max(1, config_.max_inflight)),
      jitter_state_(0x243F6A8885A308D3ull) {
    config_.validate();
    split_url(config_.base_url);
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

int HttpChatEndpoint::last_attempts() noexcept { return g_last_attempts; }

Completion HttpChatEndpoint::complete(const Conversation& conversation) {
    check_conversation(conversation);
    const auto url = split_url(config_.base_url);
    const std::string body = chat_request_body(conversation, config_);

    limiter_.acquire();
    struct Release {
        InflightLimiter& l;
        ~Release() { l.release(); }
    } release{limiter_};

    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.request_timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        g_last_attempts = attempt + 1;
        if (attempt > 0) {
            double jitter;
            {
                std::lock_guard lock(rng_mu_);
                jitter_state_ = jitter_state_ * 6364136223846793005ull + 1442695040888963407ull;
                jitter = 0.5 + 0.5 * static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53;
            }
            const auto base = config_.backoff_base.count() * (std::int64_t{1} << std::min(attempt - 1, 20));
            const auto delay = std::min<std::int64_t>(base, config_.backoff_cap.count());
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<std::int64_t>(static_cast<double>(delay) * jitter)));
        }
        auto res = client.Post(url.prefix + "/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthFailure("endpoint rejected credentials (HTTP " +
                              std::to_string(res->status) + ")");
        if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw EndpointFailure("HTTP " + std::to_string(res->status) + ": " + res->body);

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw EndpointFailure(std::string("malformed response body: ") + e.what());
        }
        const auto& choices = doc.value("choices", nlohmann::json::array());
        if (choices.empty() || !choices[0].contains("message"))
            throw EndpointFailure("response has no choices");
        std::string reply = choices[0]["message"].value("content", "");
        Completion c{reply, {}};
        if (doc.contains("usage") && doc["usage"].is_object()) {
            c.usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
            c.usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            c.usage = estimate_usage(conversation, reply);
        }
        return c;
    }
    throw EndpointFailure("giving up after " + std::to_string(config_.max_retries + 1) +
                          " attempts: " + last_error);
}

}  // namespace sop
