#include "sop/llm.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sop/errors.hpp"

namespace sop {

using nlohmann::json;

std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::System: return "system";
        case ChatRole::User: return "user";
        case ChatRole::Assistant: return "assistant";
    }
    return "?";
}

ChatRole parse_chat_role(std::string_view text) {
    if (text == "system") return ChatRole::System;
    if (text == "user") return ChatRole::User;
    if (text == "assistant") return ChatRole::Assistant;
    throw EndpointFailure("unknown chat role '" + std::string(text) + "'");
}

void check_conversation(const Conversation& conversation) {
    if (conversation.empty()) throw std::invalid_argument("conversation is empty");
    if (conversation.front().role != ChatRole::System)
        throw std::invalid_argument("conversation must start with a system message");
    for (const auto& m : conversation)
        if (m.role != ChatRole::System && m.content.empty())
            throw std::invalid_argument("user/assistant messages must not be empty");
}

std::size_t character_count(std::string_view text) {
    std::size_t n = 0;
    for (unsigned char c : text)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

Usage estimate_usage(const Conversation& conversation, std::string_view reply) {
    std::size_t prompt_chars = 0;
    for (const auto& m : conversation) prompt_chars += character_count(m.content);
    const auto quarter = [](std::size_t chars) {
        return static_cast<std::int64_t>((chars + 3) / 4);
    };
    return Usage{quarter(prompt_chars), quarter(character_count(reply)), true};
}

Usage sum_usage(std::span<const Usage> usages) {
    Usage total;
    for (const auto& u : usages) total += u;
    return total;
}

double normalize_cost(std::int64_t scheme_total, std::int64_t baseline_total) {
    if (baseline_total <= 0) throw std::invalid_argument("baseline total must be positive");
    const double ratio = static_cast<double>(scheme_total) / static_cast<double>(baseline_total);
    return std::round(ratio * 100.0) / 100.0;
}

void EndpointConfig::validate() const {
    if (base_url.empty()) throw ConfigError("endpoint.base_url", "must not be empty");
    if (model_name.empty()) throw ConfigError("endpoint.model", "must not be empty");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ConfigError("endpoint.temperature", "must lie in [0, 2]");
    if (max_retries < 0) throw ConfigError("endpoint.max_retries", "must be >= 0");
    if (max_inflight < 1) throw ConfigError("endpoint.max_inflight", "must be >= 1");
    if (max_reply_tokens < 1) throw ConfigError("endpoint.max_reply_tokens", "must be >= 1");
    if (request_timeout.count() <= 0)
        throw ConfigError("endpoint.request_timeout_ms", "must be positive");
}

ScriptedEndpoint::ScriptedEndpoint(std::vector<std::string> replies)
    : replies_(std::move(replies)) {}

Completion ScriptedEndpoint::complete(const Conversation& conversation) {
    check_conversation(conversation);
    std::lock_guard lock(mu_);
    if (next_ >= replies_.size())
        throw EndpointFailure("scripted endpoint exhausted after " + std::to_string(next_) +
                              " replies");
    std::string reply = replies_[next_++];
    return {reply, estimate_usage(conversation, reply)};
}

std::size_t ScriptedEndpoint::calls() const {
    std::lock_guard lock(mu_);
    return next_;
}

Completion FunctionEndpoint::complete(const Conversation& conversation) {
    check_conversation(conversation);
    std::string reply;
    {
        std::lock_guard lock(mu_);
        reply = fn_(conversation);
    }
    return {reply, estimate_usage(conversation, reply)};
}

namespace {

json conversation_json(const Conversation& conversation) {
    json arr = json::array();
    for (const auto& m : conversation)
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return arr;
}

json usage_json(const Usage& u) {
    return {{"prompt_tokens", u.prompt_tokens},
            {"completion_tokens", u.completion_tokens},
            {"estimated", u.estimated}};
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace

std::string conversation_key(const Conversation& conversation) {
    return sha256_hex(conversation_json(conversation).dump());
}

RecordingEndpoint::RecordingEndpoint(std::shared_ptr<ChatEndpoint> inner,
                                     std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

Completion RecordingEndpoint::complete(const Conversation& conversation) {
    Completion c = inner_->complete(conversation);
    const std::string key = conversation_key(conversation);
    const json doc{{"key", key},
                   {"conversation", conversation_json(conversation)},
                   {"reply", c.reply},
                   {"usage", usage_json(c.usage)}};
    std::lock_guard lock(mu_);
    std::ofstream(dir_ / (key + ".json")) << doc.dump(2) << '\n';
    return c;
}

ReplayEndpoint::ReplayEndpoint(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_))
        throw ConfigError("endpoint", "replay directory '" + dir_.string() + "' does not exist");
}

Completion ReplayEndpoint::complete(const Conversation& conversation) {
    check_conversation(conversation);
    const std::string key = conversation_key(conversation);
    std::ifstream in(dir_ / (key + ".json"));
    if (!in) throw EndpointFailure("no recorded exchange for conversation " + key);
    const json doc = json::parse(in);
    const auto& u = doc.at("usage");
    return {doc.at("reply").get<std::string>(),
            Usage{u.at("prompt_tokens").get<std::int64_t>(),
                  u.at("completion_tokens").get<std::int64_t>(), u.value("estimated", false)}};
}

void InflightLimiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
}

void InflightLimiter::release() {
    {
        std::lock_guard lock(mu_);
        ++free_;
    }
    cv_.notify_one();
}

std::string chat_request_body(const Conversation& conversation, const EndpointConfig& config) {
    const json body{{"model", config.model_name},
                    {"messages", conversation_json(conversation)},
                    {"temperature", config.temperature},
                    {"max_tokens", config.max_reply_tokens}};
    return body.dump();
}

}  // namespace sop
