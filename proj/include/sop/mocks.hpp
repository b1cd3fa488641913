#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>
#include <string_view>

#include "sop/llm.hpp"
#include "sop/runtime.hpp"

namespace sop {

/// Scripted agent policies used to exercise the pipeline without a model.
enum class MockPolicy {
    Oracle,  ///< queries the stored global argmax
    Random,  ///< four uniform points per reply
    Ascent,  ///< local ascent on log f from the domain centre
};
std::string_view to_string(MockPolicy policy);
/// "oracle", "random" or "ascent", optionally with a ".script" suffix.
std::optional<MockPolicy> parse_mock_policy(std::string_view text);

/// An endpoint that plays every role of every scheme: poll-worker prompts get
/// "1", critic prompts get a fixed critique, and agent prompts get a
/// well-formed response whose NEXT block is a literal next_points list chosen
/// by `policy`. The policy reads exact values from the session's query log.
/// The session must outlive the endpoint.
std::shared_ptr<ChatEndpoint> make_policy_endpoint(MockPolicy policy, const Session& session,
                                                   std::uint64_t seed);

/// The points `policy` would propose next, given the session's history.
std::vector<Point> propose_points(MockPolicy policy, const Session& session, std::uint64_t seed,
                                  std::uint64_t call_index);

}  // namespace sop
