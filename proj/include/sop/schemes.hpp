#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sop/llm.hpp"
#include "sop/runtime.hpp"
#include "sop/sandbox.hpp"

namespace sop {

enum class SchemeKind { LLMPlus, SelfReflection, Debate, Majority, ACE };
std::string_view to_string(SchemeKind kind);
/// Accepts llmplus (or llm+), self-reflection, debate, majority and ace.
SchemeKind parse_scheme_kind(std::string_view text);

struct SchemeConfig {
    SchemeKind kind = SchemeKind::LLMPlus;
    int agent_count = 1;  ///< Debate >= 2, Majority >= 3 and odd; 1 otherwise
    int max_rounds = 16;
    int parse_retries = 2;
    int abort_after_consecutive_failures = 3;
    int exec_timeout_ms = 10000;
    int exec_memory_mb = 512;
    int exec_max_points = 1000;

    /// Config with the usual agent count for `kind` (2 for Debate, 3 for Majority).
    static SchemeConfig of(SchemeKind kind);
    void validate() const;
};

struct RoleTag {
    enum Kind { Actor, Critic, Synthesizer, Agent, PollWorker, Reflector };
    Kind kind = Actor;
    int agent = 0;  ///< 1-based, Agent only

    std::string str() const;  ///< "Actor", "Agent(2)", ...
    static RoleTag parse(std::string_view text);
    bool operator==(const RoleTag&) const = default;
};

struct TranscriptEvent {
    RoleTag role;
    int round = 0;
    std::string rendered_prompt;  ///< messages added to the conversation for this call
    std::string raw_reply;
    Usage usage;
    bool retry = false;  ///< re-prompt after a malformed reply
};

struct ExecutedBatch {
    int round = 0;
    RoleTag source;
    std::vector<Point> points;
    std::size_t after_event = 0;  ///< number of events logged before the execution
};

struct Transcript {
    std::vector<TranscriptEvent> events;
    std::vector<ExecutedBatch> executed_batches;
    std::string abort_reason;
};

/// Sum of event usages; `estimated` is set if any event was estimated.
Usage count_usage(const Transcript& transcript);

/// One JSON document per line, events and executed batches interleaved in
/// the order they happened.
std::string transcript_jsonl(const Transcript& transcript);
Transcript transcript_from_jsonl(std::string_view text);

/// Role tags of non-retry events joined with spaces, e.g. "Actor Critic Synthesizer".
std::string role_sequence(const Transcript& transcript);

/// Runs the scheme until the session leaves Running. Failed rounds and
/// exhausted round limits abort the session; the reason is stored in the
/// transcript. EndpointFailure also aborts, except AuthFailure which is
/// rethrown.
Transcript run_scheme(const SchemeConfig& config, Session& session, ChatEndpoint& llm,
                      SandboxClient& sandbox, std::uint64_t seed);

/// Asks a poll worker for the majority response. Falls back to a seeded
/// uniform choice when the reply has no valid id after one retry. Events are
/// appended to `log` when given.
int elect_majority(const std::vector<std::pair<int, std::string>>& responses, ChatEndpoint& llm,
                   std::uint64_t seed, int round = 0, Transcript* log = nullptr);

}  // namespace sop
