#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "sop/world.hpp"

namespace sop {

struct MaxSeen {
    Point point;
    double value = 0.0;

    bool operator==(const MaxSeen&) const = default;
};

/// The three labelled fields of an agent reply.
struct AgentResponse {
    std::string strategy;
    std::optional<MaxSeen> max_seen;  ///< recorded only; never used for scoring
    std::string code;

    bool operator==(const AgentResponse&) const = default;
};

enum class ResponseField { Strategy, MaxSeen, Next };
std::string_view to_string(ResponseField field);

struct ParseError {
    ResponseField field;
    std::string message;
};

/// Labels may carry list markers and markdown emphasis. MY_CURRENT_STRATEGY
/// and MAX_SEEN_SO_FAR match case-insensitively, NEXT only in capitals. NEXT takes the first fenced block after its label.
/// MAX_SEEN_SO_FAR takes the first two numbers as the point and the last as
/// the value; a missing label or one without numbers yields no max_seen.
std::variant<AgentResponse, ParseError> parse_response(std::string_view text);

/// Renders a response in the format parse_response reads.
std::string format_response(const AgentResponse& response);

}  // namespace sop
