#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sop/world.hpp"

namespace sop {

inline constexpr double kDefaultRelaxation = 0.95;

enum class SessionStatus { Running, Succeeded, BudgetExhausted, Aborted };
std::string_view to_string(SessionStatus status);
SessionStatus parse_session_status(std::string_view text);

enum class FaultKind { OutOfDomain, DimensionMismatch };
std::string_view to_string(FaultKind kind);

struct Fault {
    FaultKind kind;
    std::string message;
};

struct Observation {
    Point point;
    std::variant<double, Fault> outcome;

    bool has_value() const noexcept { return std::holds_alternative<double>(outcome); }
    double value() const { return std::get<double>(outcome); }
    const Fault& fault() const { return std::get<Fault>(outcome); }
};

struct QueryBatch {
    std::vector<Point> points;
};

/// One charged query. Faulted queries are logged without a value.
struct QueryRecord {
    int round = 0;
    Point point;
    std::optional<double> value;
};

struct Feedback {
    std::vector<Observation> observations;
    int remaining_budget = 0;
    std::optional<std::string> exec_error;
    std::optional<std::string> notes;
};

/// One agent-vs-world episode. Single writer; the world and its analysis are
/// shared read-only.
class Session {
public:
    Session(std::shared_ptr<const WorldSpec> world, std::shared_ptr<const WorldAnalysis> analysis,
            int budget, double relaxation = kDefaultRelaxation);

    /// Charges one query per point (duplicates and faults included) until the
    /// budget runs out or success is reached; the rest are reported, not
    /// evaluated. Throws SessionClosed unless Running.
    Feedback submit_batch(const QueryBatch& batch);

    /// Feedback for a round whose code failed to run. Charges nothing.
    Feedback exec_failure(std::string trace);

    void abort(std::string reason);

    bool check_success() const noexcept;
    double success_threshold() const noexcept;

    SessionStatus status() const noexcept { return status_; }
    bool running() const noexcept { return status_ == SessionStatus::Running; }
    int budget() const noexcept { return budget_; }
    int remaining() const noexcept { return budget_ - static_cast<int>(queries_.size()); }
    int queries_used() const noexcept { return static_cast<int>(queries_.size()); }
    int rounds_completed() const noexcept { return rounds_; }
    double relaxation() const noexcept { return relaxation_; }
    std::optional<double> best_value() const noexcept { return best_; }
    const std::vector<QueryRecord>& queries() const noexcept { return queries_; }
    const std::string& abort_reason() const noexcept { return abort_reason_; }
    const WorldSpec& world() const noexcept { return *world_; }
    const WorldAnalysis& analysis() const noexcept { return *analysis_; }

private:
    void ensure_running() const;

    std::shared_ptr<const WorldSpec> world_;
    std::shared_ptr<const WorldAnalysis> analysis_;
    int budget_;
    double relaxation_;
    std::vector<QueryRecord> queries_;
    std::optional<double> best_;
    int rounds_ = 0;
    SessionStatus status_ = SessionStatus::Running;
    std::string abort_reason_;
};

/// Precondition failures (budget < 1, relaxation outside (0, 1]) throw ConfigError.
Session open_session(std::shared_ptr<const WorldSpec> world,
                     std::shared_ptr<const WorldAnalysis> analysis, int budget,
                     double relaxation = kDefaultRelaxation);

/// Plain-text World feedback: one "(x, y, f)" line per observation with four
/// decimals, optional notes and error trace, then "Remaining queries: N".
std::string render_feedback(const Feedback& feedback);

/// "(x, y)" with four decimals; shared by feedback and prompt rendering.
std::string format_point(std::span<const double> point);

}  // namespace sop
