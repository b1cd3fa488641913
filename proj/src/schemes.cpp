#include "sop/schemes.hpp"

#include <json.hpp>
#include <optional>
#include <regex>

#include "sop/errors.hpp"
#include "sop/response.hpp"
#include "sop/rng.hpp"
#include "sop/templates.hpp"

namespace sop {

using nlohmann::json;

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::LLMPlus: return "llmplus";
        case SchemeKind::SelfReflection: return "self-reflection";
        case SchemeKind::Debate: return "debate";
        case SchemeKind::Majority: return "majority";
        case SchemeKind::ACE: return "ace";
    }
    return "?";
}

SchemeKind parse_scheme_kind(std::string_view text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "llmplus" || t == "llm+") return SchemeKind::LLMPlus;
    if (t == "self-reflection" || t == "selfreflection") return SchemeKind::SelfReflection;
    if (t == "debate") return SchemeKind::Debate;
    if (t == "majority") return SchemeKind::Majority;
    if (t == "ace") return SchemeKind::ACE;
    throw ConfigError("scheme", "unknown scheme '" + std::string(text) + "'");
}

SchemeConfig SchemeConfig::of(SchemeKind kind) {
    SchemeConfig c;
    c.kind = kind;
    c.agent_count = kind == SchemeKind::Debate ? 2 : kind == SchemeKind::Majority ? 3 : 1;
    return c;
}

void SchemeConfig::validate() const {
    switch (kind) {
        case SchemeKind::Debate:
            if (agent_count < 2) throw ConfigError("scheme.agents", "debate needs at least 2 agents");
            break;
        case SchemeKind::Majority:
            if (agent_count < 3 || agent_count % 2 == 0)
                throw ConfigError("scheme.agents", "majority needs an odd agent count of at least 3");
            break;
        default:
            if (agent_count != 1)
                throw ConfigError("scheme.agents", std::string(to_string(kind)) + " uses a single agent");
    }
    if (max_rounds < 1) throw ConfigError("scheme.max_rounds", "must be >= 1");
    if (parse_retries < 0) throw ConfigError("scheme.parse_retries", "must be >= 0");
    if (abort_after_consecutive_failures < 1)
        throw ConfigError("scheme.abort_after_consecutive_failures", "must be >= 1");
    if (exec_timeout_ms <= 0) throw ConfigError("scheme.exec_timeout_ms", "must be positive");
    if (exec_memory_mb <= 0) throw ConfigError("scheme.exec_memory_mb", "must be positive");
    if (exec_max_points < 1) throw ConfigError("scheme.exec_max_points", "must be >= 1");
}

std::string RoleTag::str() const {
    switch (kind) {
        case Actor: return "Actor";
        case Critic: return "Critic";
        case Synthesizer: return "Synthesizer";
        case Agent: return "Agent(" + std::to_string(agent) + ")";
        case PollWorker: return "PollWorker";
        case Reflector: return "Reflector";
    }
    return "?";
}

RoleTag RoleTag::parse(std::string_view text) {
    if (text == "Actor") return {Actor, 0};
    if (text == "Critic") return {Critic, 0};
    if (text == "Synthesizer") return {Synthesizer, 0};
    if (text == "PollWorker") return {PollWorker, 0};
    if (text == "Reflector") return {Reflector, 0};
    if (text.size() > 7 && text.substr(0, 6) == "Agent(" && text.back() == ')')
        return {Agent, std::stoi(std::string(text.substr(6, text.size() - 7)))};
    throw ConfigError("transcript", "unknown role tag '" + std::string(text) + "'");
}

Usage count_usage(const Transcript& transcript) {
    Usage total;
    for (const auto& e : transcript.events) total += e.usage;
    return total;
}

std::string transcript_jsonl(const Transcript& t) {
    std::string out;
    const auto emit_batches = [&](std::size_t upto, std::size_t& next) {
        while (next < t.executed_batches.size() && t.executed_batches[next].after_event <= upto) {
            const auto& b = t.executed_batches[next++];
            out += json{{"type", "batch"},
                        {"round", b.round},
                        {"source", b.source.str()},
                        {"points", b.points}}
                       .dump();
            out += '\n';
        }
    };
    std::size_t next_batch = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        emit_batches(i, next_batch);
        const auto& e = t.events[i];
        out += json{{"type", "event"},
                    {"role", e.role.str()},
                    {"round", e.round},
                    {"retry", e.retry},
                    {"prompt", e.rendered_prompt},
                    {"reply", e.raw_reply},
                    {"usage",
                     {{"prompt_tokens", e.usage.prompt_tokens},
                      {"completion_tokens", e.usage.completion_tokens},
                      {"estimated", e.usage.estimated}}}}
                   .dump();
        out += '\n';
    }
    emit_batches(t.events.size(), next_batch);
    if (!t.abort_reason.empty()) out += json{{"type", "abort"}, {"reason", t.abort_reason}}.dump() + '\n';
    return out;
}

Transcript transcript_from_jsonl(std::string_view text) {
    Transcript t;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        const json doc = json::parse(line);
        const auto type = doc.at("type").get<std::string>();
        if (type == "event") {
            TranscriptEvent e;
            e.role = RoleTag::parse(doc.at("role").get<std::string>());
            e.round = doc.at("round").get<int>();
            e.retry = doc.at("retry").get<bool>();
            e.rendered_prompt = doc.at("prompt").get<std::string>();
            e.raw_reply = doc.at("reply").get<std::string>();
            const auto& u = doc.at("usage");
            e.usage = {u.at("prompt_tokens").get<std::int64_t>(),
                       u.at("completion_tokens").get<std::int64_t>(), u.at("estimated").get<bool>()};
            t.events.push_back(std::move(e));
        } else if (type == "batch") {
            t.executed_batches.push_back({doc.at("round").get<int>(),
                                          RoleTag::parse(doc.at("source").get<std::string>()),
                                          doc.at("points").get<std::vector<Point>>(), t.events.size()});
        } else if (type == "abort") {
            t.abort_reason = doc.at("reason").get<std::string>();
        }
    }
    return t;
}

std::string role_sequence(const Transcript& transcript) {
    std::string out;
    for (const auto& e : transcript.events) {
        if (e.retry) continue;
        if (!out.empty()) out += ' ';
        out += e.role.str();
    }
    return out;
}

namespace {

struct Participant {
    Conversation conversation;
    std::string last_reply;
};

class Orchestrator {
public:
    Orchestrator(const SchemeConfig& config, Session& session, ChatEndpoint& llm,
                 SandboxClient& sandbox, std::uint64_t seed)
        : config_(config), session_(session), llm_(llm), sandbox_(sandbox), seed_(seed),
          bindings_(problem_bindings(session.world(), session.budget())) {}

    Transcript run() {
        try {
            switch (config_.kind) {
                case SchemeKind::LLMPlus: run_llm_plus(); break;
                case SchemeKind::SelfReflection: run_self_reflection(); break;
                case SchemeKind::Debate: run_debate(); break;
                case SchemeKind::Majority: run_majority(); break;
                case SchemeKind::ACE: run_ace(); break;
            }
            if (session_.running()) abort("round limit of " + std::to_string(config_.max_rounds) + " reached");
        } catch (const AuthFailure&) {
            throw;
        } catch (const EndpointFailure& e) {
            abort(std::string("endpoint failure: ") + e.what());
        }
        return std::move(transcript_);
    }

private:
    Participant open(std::string_view template_name) const {
        Participant p;
        p.conversation.push_back({ChatRole::System, render_text(prompt_template(template_name).system, bindings_)});
        return p;
    }

    // Template body with the problem bindings plus `extra`.
    std::string body(std::string_view template_name, const Bindings& extra = {}) const {
        Bindings all = bindings_;
        for (const auto& [k, v] : extra) all[k] = v;
        return render_text(prompt_template(template_name).body, all);
    }

    // Appends `prompt`, calls the endpoint and logs the exchange.
    const std::string& call(Participant& p, const std::string& prompt, RoleTag role, int round,
                            bool retry = false) {
        std::string logged_prompt;
        if (p.conversation.size() == 1) logged_prompt = p.conversation.front().content + "\n\n";
        logged_prompt += prompt;
        p.conversation.push_back({ChatRole::User, prompt});
        Completion c = llm_.complete(p.conversation);
        p.conversation.push_back({ChatRole::Assistant, c.reply});
        transcript_.events.push_back({role, round, std::move(logged_prompt), c.reply, c.usage, retry});
        p.last_reply = std::move(c.reply);
        return p.last_reply;
    }

    struct Attempt {
        std::optional<AgentResponse> response;
        std::string error;
    };

    // A call whose reply must follow the response format, with re-prompts.
    Attempt ask(Participant& p, const std::string& prompt, RoleTag role, int round) {
        auto parsed = parse_response(call(p, prompt, role, round));
        for (int retry = 0; retry < config_.parse_retries && std::holds_alternative<ParseError>(parsed); ++retry) {
            const auto& err = std::get<ParseError>(parsed);
            const auto again = render_text(prompt_template("parse_retry").body,
                                           {{"PARSE_ERROR", err.message}});
            parsed = parse_response(call(p, again, role, round, true));
        }
        if (auto* ok = std::get_if<AgentResponse>(&parsed)) return {std::move(*ok), {}};
        const auto& err = std::get<ParseError>(parsed);
        return {std::nullopt, std::string(to_string(err.field)) + ": " + err.message};
    }

    // Runs the attempt's code and submits its points. Returns the rendered feedback.
    std::string execute(const Attempt& attempt, RoleTag source, int round) {
        Feedback fb;
        bool failed = true;
        if (!attempt.response) {
            fb = session_.exec_failure("Your response could not be parsed (" + attempt.error +
                                       "), so no code was run.");
        } else {
            ExecRequest req{attempt.response->code, config_.exec_timeout_ms, config_.exec_memory_mb,
                            config_.exec_max_points};
            ExecResult res = sandbox_.execute(req);
            if (res.status != ExecStatus::Ok) {
                fb = session_.exec_failure(describe_failure(res, req));
            } else {
                transcript_.executed_batches.push_back(
                    {round, source, res.points, transcript_.events.size()});
                fb = session_.submit_batch(QueryBatch{std::move(res.points)});
                failed = false;
            }
        }
        consecutive_failures_ = failed ? consecutive_failures_ + 1 : 0;
        if (session_.running() && consecutive_failures_ >= config_.abort_after_consecutive_failures)
            abort(std::to_string(consecutive_failures_) + " consecutive rounds without an executable batch");
        return render_feedback(fb);
    }

    std::string feedback_prompt(const std::string& observations) const {
        return render_text(prompt_template("feedback").body, {{"OBSERVATIONS", observations}});
    }

    void abort(std::string reason) {
        if (session_.running()) session_.abort(reason);
        transcript_.abort_reason = std::move(reason);
    }

    bool more(int round) const { return session_.running() && round <= config_.max_rounds; }

    void run_llm_plus() {
        Participant agent = open("actor");
        std::string prompt = body("actor");
        for (int r = 1; more(r); ++r) {
            const RoleTag tag{RoleTag::Agent, 1};
            const auto attempt = ask(agent, prompt, tag, r);
            prompt = feedback_prompt(execute(attempt, tag, r));
        }
    }

    void run_self_reflection() {
        Participant agent = open("actor");
        std::string prompt = body("actor");
        const std::string reflect = prompt_template("self_reflection").body;
        for (int r = 1; more(r); ++r) {
            ask(agent, prompt, {RoleTag::Agent, 1}, r);
            const auto revised = ask(agent, reflect, {RoleTag::Reflector, 0}, r);
            prompt = feedback_prompt(execute(revised, {RoleTag::Reflector, 0}, r));
        }
    }

    void run_debate() {
        const int k = config_.agent_count;
        std::vector<Participant> agents;
        for (int i = 0; i < k; ++i) agents.push_back(open("actor"));
        std::vector<std::string> prompts(k, body("actor"));
        const auto& exchange_tpl = prompt_template("debate_exchange").body;
        for (int r = 1; more(r); ++r) {
            std::vector<std::string> first(k);
            for (int i = 0; i < k; ++i) {
                ask(agents[i], prompts[i], {RoleTag::Agent, i + 1}, r);
                first[i] = agents[i].last_reply;
            }
            Attempt lead;
            for (int i = 0; i < k; ++i) {
                std::string others;
                for (int j = 0; j < k; ++j) {
                    if (j == i) continue;
                    if (!others.empty()) others += "\n\n";
                    others += k == 2 ? first[j]
                                     : "The response from agent " + std::to_string(j + 1) + ": " + first[j];
                }
                auto revised = ask(agents[i], render_text(exchange_tpl, {{"AGENT_RESPONSES", others}}),
                                   {RoleTag::Agent, i + 1}, r);
                if (i == 0) lead = std::move(revised);
            }
            const auto fb = feedback_prompt(execute(lead, {RoleTag::Agent, 1}, r));
            std::fill(prompts.begin(), prompts.end(), fb);
        }
    }

    void run_majority() {
        const int k = config_.agent_count;
        std::vector<Participant> agents;
        for (int i = 0; i < k; ++i) agents.push_back(open("actor"));
        std::string prompt = body("actor");
        for (int r = 1; more(r); ++r) {
            std::vector<Attempt> attempts;
            std::vector<std::pair<int, std::string>> candidates;
            for (int i = 0; i < k; ++i) {
                attempts.push_back(ask(agents[i], prompt, {RoleTag::Agent, i + 1}, r));
                if (attempts.back().response) candidates.emplace_back(i + 1, agents[i].last_reply);
            }
            int elected = 1;
            if (candidates.size() == 1) {
                elected = candidates.front().first;
            } else if (candidates.size() > 1) {
                elected = elect_majority(candidates, llm_, seed_, r, &transcript_);
            }
            prompt = feedback_prompt(execute(attempts[elected - 1], {RoleTag::Agent, elected}, r));
        }
    }

    void run_ace() {
        Participant actor = open("actor");
        Participant critic = open("critic_initial");

        Attempt thesis = ask(actor, body("actor"), {RoleTag::Actor, 0}, 1);
        RoleTag source{RoleTag::Actor, 0};
        for (int r = 1;; ++r) {
            const std::string observations = execute(thesis, source, r);
            if (!session_.running() || r >= config_.max_rounds) break;

            const Bindings critique{{"THESIS", actor.last_reply}, {"OBSERVATIONS", observations}};
            const std::string critic_prompt =
                body(r == 1 ? "critic_initial" : "critic_transitional", critique);
            const std::string antithesis = call(critic, critic_prompt, {RoleTag::Critic, 0}, r);

            const std::string synth = render_text(prompt_template("synthesizer").body,
                                                  {{"OBSERVATIONS", observations}, {"ANTITHESIS", antithesis}});
            source = {RoleTag::Synthesizer, 0};
            thesis = ask(actor, synth, source, r);
        }
    }

    const SchemeConfig& config_;
    Session& session_;
    ChatEndpoint& llm_;
    SandboxClient& sandbox_;
    std::uint64_t seed_;
    Bindings bindings_;
    Transcript transcript_;
    int consecutive_failures_ = 0;
};

}  // namespace

Transcript run_scheme(const SchemeConfig& config, Session& session, ChatEndpoint& llm,
                      SandboxClient& sandbox, std::uint64_t seed) {
    config.validate();
    if (!session.running()) throw SessionClosed("run_scheme needs a running session");
    return Orchestrator(config, session, llm, sandbox, seed).run();
}

int elect_majority(const std::vector<std::pair<int, std::string>>& responses, ChatEndpoint& llm,
                   std::uint64_t seed, int round, Transcript* log) {
    if (responses.size() < 2) throw std::invalid_argument("elect_majority needs at least two responses");
    std::string listing;
    int max_id = 0;
    for (const auto& [id, text] : responses) {
        if (!listing.empty()) listing += "\n\n";
        listing += "The response from agent " + std::to_string(id) + ": " + text;
        max_id = std::max(max_id, id);
    }
    const auto prompt = render_template("poll_worker", {{"AGENT_RESPONSES", listing}});
    Conversation conv{{ChatRole::System, prompt.system}, {ChatRole::User, prompt.user}};

    const auto valid_id = [&](const std::string& reply) -> std::optional<int> {
        static const std::regex kInt(R"(\d+)");
        for (auto it = std::sregex_iterator(reply.begin(), reply.end(), kInt);
             it != std::sregex_iterator(); ++it) {
            if (it->length() > 9) continue;
            const int id = std::stoi(it->str());
            for (const auto& r : responses)
                if (r.first == id) return id;
        }
        return std::nullopt;
    };

    std::string logged = prompt.system + "\n\n" + prompt.user;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Completion c = llm.complete(conv);
        if (log) log->events.push_back({{RoleTag::PollWorker, 0}, round, logged, c.reply, c.usage, attempt > 0});
        if (auto id = valid_id(c.reply)) return *id;
        const std::string retry = render_text(prompt_template("poll_retry").body,
                                              {{"AGENT_COUNT", std::to_string(max_id)}});
        conv.push_back({ChatRole::Assistant, c.reply});
        conv.push_back({ChatRole::User, retry});
        logged = retry;
    }
    Philox rng(seed, static_cast<std::uint64_t>(round));
    return responses[rng.below(responses.size())].first;
}

}  // namespace sop
