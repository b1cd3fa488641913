#include "sop/runtime.hpp"

#include <cmath>
#include <cstdio>

#include "sop/errors.hpp"

namespace sop {

namespace {

constexpr double kSuccessTolerance = 1e-9;

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string_view to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::Running: return "Running";
        case SessionStatus::Succeeded: return "Succeeded";
        case SessionStatus::BudgetExhausted: return "BudgetExhausted";
        case SessionStatus::Aborted: return "Aborted";
    }
    return "?";
}

SessionStatus parse_session_status(std::string_view text) {
    for (auto s : {SessionStatus::Running, SessionStatus::Succeeded,
                   SessionStatus::BudgetExhausted, SessionStatus::Aborted})
        if (to_string(s) == text) return s;
    throw ConfigError("status", "unknown session status '" + std::string(text) + "'");
}

std::string_view to_string(FaultKind kind) {
    return kind == FaultKind::OutOfDomain ? "OutOfDomain" : "DimensionMismatch";
}

Session::Session(std::shared_ptr<const WorldSpec> world,
                 std::shared_ptr<const WorldAnalysis> analysis, int budget, double relaxation)
    : world_(std::move(world)),
      analysis_(std::move(analysis)),
      budget_(budget),
      relaxation_(relaxation) {
    if (budget_ < 1) throw ConfigError("budget", "must be >= 1");
    if (!(relaxation_ > 0.0 && relaxation_ <= 1.0))
        throw ConfigError("relaxation", "must lie in (0, 1]");
    if (!world_ || !analysis_) throw ConfigError("world", "session needs a world and its analysis");
}

Session open_session(std::shared_ptr<const WorldSpec> world,
                     std::shared_ptr<const WorldAnalysis> analysis, int budget,
                     double relaxation) {
    return Session(std::move(world), std::move(analysis), budget, relaxation);
}

void Session::ensure_running() const {
    if (status_ != SessionStatus::Running)
        throw SessionClosed("session is " + std::string(to_string(status_)));
}

double Session::success_threshold() const noexcept {
    return relaxation_ * analysis_->global_max;
}

bool Session::check_success() const noexcept {
    if (!best_) return false;
    const double t = success_threshold();
    return *best_ >= t - kSuccessTolerance * std::abs(t);
}

Feedback Session::submit_batch(const QueryBatch& batch) {
    ensure_running();
    if (batch.points.empty()) throw std::invalid_argument("query batch must not be empty");
    const int round = ++rounds_;
    Feedback fb;
    std::size_t evaluated = 0;
    for (const auto& p : batch.points) {
        if (remaining() == 0 || status_ != SessionStatus::Running) break;
        Observation obs{p, 0.0};
        QueryRecord rec{round, p, std::nullopt};
        if (static_cast<int>(p.size()) != world_->inputs()) {
            obs.outcome = Fault{FaultKind::DimensionMismatch,
                                "expected " + std::to_string(world_->inputs()) +
                                    " coordinates, got " + std::to_string(p.size())};
        } else if (!world_->contains(p)) {
            obs.outcome = Fault{FaultKind::OutOfDomain, "point outside the domain"};
        } else {
            const double v = evaluate_unchecked(*world_, p.data());
            obs.outcome = v;
            rec.value = v;
            if (!best_ || v > *best_) best_ = v;
        }
        queries_.push_back(std::move(rec));
        fb.observations.push_back(std::move(obs));
        ++evaluated;
        if (check_success()) status_ = SessionStatus::Succeeded;
    }
    if (status_ == SessionStatus::Running && remaining() == 0)
        status_ = SessionStatus::BudgetExhausted;

    const auto skipped = batch.points.size() - evaluated;
    if (skipped > 0) {
        fb.notes = status_ == SessionStatus::Succeeded
                       ? std::to_string(skipped) + " point(s) not evaluated: the maximum was found"
                       : "batch truncated: " + std::to_string(skipped) +
                             " point(s) exceeded the remaining query budget and were not evaluated";
    }
    fb.remaining_budget = remaining();
    return fb;
}

Feedback Session::exec_failure(std::string trace) {
    ensure_running();
    ++rounds_;
    Feedback fb;
    fb.remaining_budget = remaining();
    fb.exec_error = std::move(trace);
    fb.notes = "no points were evaluated and no queries were charged";
    return fb;
}

void Session::abort(std::string reason) {
    if (status_ != SessionStatus::Running) return;
    status_ = SessionStatus::Aborted;
    abort_reason_ = std::move(reason);
}

std::string format_point(std::span<const double> point) {
    std::string s = "(";
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (i) s += ", ";
        s += fixed4(point[i]);
    }
    return s + ")";
}

std::string render_feedback(const Feedback& feedback) {
    std::string out;
    for (const auto& obs : feedback.observations) {
        std::string line = "(";
        for (double c : obs.point) line += fixed4(c) + ", ";
        if (obs.has_value()) {
            line += fixed4(obs.value());
        } else {
            line += "ERROR: " + std::string(to_string(obs.fault().kind)) + ": " + obs.fault().message;
        }
        out += line + ")\n";
    }
    if (feedback.notes) out += "Note: " + *feedback.notes + "\n";
    if (feedback.exec_error) out += "Execution error:\n" + *feedback.exec_error + "\n";
    out += "Remaining queries: " + std::to_string(feedback.remaining_budget) + "\n";
    return out;
}

}  // namespace sop
