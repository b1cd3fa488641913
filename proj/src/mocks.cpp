#include "sop/mocks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "sop/response.hpp"
#include "sop/rng.hpp"

namespace sop {

std::string_view to_string(MockPolicy policy) {
    switch (policy) {
        case MockPolicy::Oracle: return "oracle";
        case MockPolicy::Random: return "random";
        case MockPolicy::Ascent: return "ascent";
    }
    return "?";
}

std::optional<MockPolicy> parse_mock_policy(std::string_view text) {
    if (text.size() > 7 && text.substr(text.size() - 7) == ".script") text.remove_suffix(7);
    if (text == "oracle") return MockPolicy::Oracle;
    if (text == "random") return MockPolicy::Random;
    if (text == "ascent") return MockPolicy::Ascent;
    return std::nullopt;
}

namespace {

std::string exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Point clamp_to(const WorldSpec& world, Point p) {
    for (std::size_t d = 0; d < p.size(); ++d) p[d] = std::clamp(p[d], world.bounds[d].lo, world.bounds[d].hi);
    return p;
}

std::vector<Point> compass(const WorldSpec& world, const Point& centre, double step, bool with_centre) {
    std::vector<Point> out;
    if (with_centre) out.push_back(centre);
    for (std::size_t d = 0; d < centre.size(); ++d)
        for (double sign : {-1.0, 1.0}) {
            Point p = centre;
            p[d] += sign * step;
            out.push_back(clamp_to(world, std::move(p)));
        }
    return out;
}

const QueryRecord* find_logged(const std::vector<QueryRecord>& log, const Point& p) {
    for (const auto& q : log)
        if (q.value && q.point == p) return &q;
    return nullptr;
}

// A logged centre whose 2 * axes neighbours at distance `step` are all logged.
struct Stencil {
    const QueryRecord* centre;
    double step;
};

std::optional<Stencil> best_stencil(const WorldSpec& world, const std::vector<QueryRecord>& log) {
    std::optional<Stencil> best;
    for (const auto& c : log) {
        if (!c.value || (best && *c.value <= *best->centre->value)) continue;
        // Candidate steps: distances to logged points on the first axis line.
        for (const auto& q : log) {
            if (!q.value || q.point == c.point) continue;
            bool on_axis = true;
            for (std::size_t e = 1; e < c.point.size(); ++e) on_axis = on_axis && q.point[e] == c.point[e];
            if (!on_axis) continue;
            const double h = std::fabs(q.point[0] - c.point[0]);
            bool complete = true;
            for (const auto& p : compass(world, c.point, h, false)) complete = complete && find_logged(log, p);
            if (complete && (!best || *c.value > *best->centre->value || h < best->step))
                best = Stencil{&c, h};
        }
    }
    return best;
}

// Per-axis parabola through log f at c - h, c, c + h. A single Gaussian is
// exactly quadratic in log space, so the vertex is its centre.
std::optional<Point> newton_vertex(const WorldSpec& world, const std::vector<QueryRecord>& log,
                                   const Stencil& s) {
    const Point& c = s.centre->point;
    Point vertex = c;
    const double fc = *s.centre->value;
    if (!(fc > 0)) return std::nullopt;
    for (std::size_t d = 0; d < c.size(); ++d) {
        Point lo = c, hi = c;
        lo[d] -= s.step;
        hi[d] += s.step;
        const auto* ql = find_logged(log, clamp_to(world, lo));
        const auto* qh = find_logged(log, clamp_to(world, hi));
        if (!ql || !qh || !(*ql->value > 0) || !(*qh->value > 0)) return std::nullopt;
        if (ql->point[d] != lo[d] || qh->point[d] != hi[d]) return std::nullopt;  // clamped
        const double l0 = std::log(fc), lm = std::log(*ql->value), lp = std::log(*qh->value);
        const double curvature = lm - 2 * l0 + lp;
        if (!(curvature < 0)) return std::nullopt;
        vertex[d] = c[d] + s.step * (lm - lp) / (2 * curvature);
    }
    return clamp_to(world, vertex);
}

std::vector<Point> unseen(const std::vector<QueryRecord>& log, std::vector<Point> points) {
    std::vector<Point> out;
    for (auto& p : points) {
        bool dup = false;
        for (const auto& q : log) dup = dup || q.point == p;
        for (const auto& o : out) dup = dup || o == p;
        if (!dup) out.push_back(std::move(p));
    }
    return out;
}

std::vector<Point> ascent_points(const Session& session) {
    const WorldSpec& world = session.world();
    const auto& log = session.queries();
    const double initial_step = 0.1 * world.bounds[0].width();

    const QueryRecord* best = nullptr;
    for (const auto& q : log)
        if (q.value && (!best || *q.value > *best->value)) best = &q;
    if (!best) {
        Point centre;
        for (const auto& b : world.bounds) centre.push_back(0.5 * (b.lo + b.hi));
        return compass(world, centre, initial_step, true);
    }

    const auto stencil = best_stencil(world, log);
    double step = stencil ? stencil->step : initial_step;
    if (stencil) {
        if (auto v = newton_vertex(world, log, *stencil)) {
            auto pts = unseen(log, compass(world, *v, 0.5 * step, true));
            if (!pts.empty()) return pts;
        } else if (stencil->centre == best) {
            // Not concave around the incumbent: probe further out.
            step *= 2;
        }
    }
    // Refine around the incumbent until something new comes up.
    for (int i = 0; i < 40; ++i, step *= 0.5) {
        auto pts = unseen(log, compass(world, best->point, step, false));
        if (!pts.empty()) return pts;
    }
    return {best->point};
}

}  // namespace

std::vector<Point> propose_points(MockPolicy policy, const Session& session, std::uint64_t seed,
                                  std::uint64_t call_index) {
    switch (policy) {
        case MockPolicy::Oracle: return {session.analysis().global_argmax};
        case MockPolicy::Random: {
            Philox rng = Philox(seed).substream(call_index);
            std::vector<Point> out(4);
            for (auto& p : out)
                for (const auto& b : session.world().bounds) p.push_back(rng.uniform(b.lo, b.hi));
            return out;
        }
        case MockPolicy::Ascent: return ascent_points(session);
    }
    return {};
}

std::shared_ptr<ChatEndpoint> make_policy_endpoint(MockPolicy policy, const Session& session,
                                                   std::uint64_t seed) {
    auto calls = std::make_shared<std::uint64_t>(0);
    return std::make_shared<FunctionEndpoint>([policy, &session, seed, calls](const Conversation& conv) {
        const std::string& system = conv.front().content;
        if (system.find("poll worker") != std::string::npos ||
            system.find("great assistant") != std::string::npos)
            return std::string("1");
        if (system.find("assist others") != std::string::npos)
            return std::string(
                "Criticism and Suggestions:\n1. Spend fewer queries near values that are already "
                "close to the best one.\n2. Probe regions that have not been sampled yet.\n");

        const auto points = propose_points(policy, session, seed, (*calls)++);
        AgentResponse r;
        r.strategy = std::string("Scripted ") + std::string(to_string(policy)) + " policy.";
        if (const auto best = session.best_value()) {
            for (const auto& q : session.queries())
                if (q.value && *q.value == *best) {
                    r.max_seen = MaxSeen{q.point, *best};
                    break;
                }
        }
        r.code = "next_points = [";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i) r.code += ", ";
            r.code += "(" + exact(points[i][0]) + ", " + exact(points[i][1]) + ")";
        }
        r.code += "]";
        return format_response(r);
    });
}

}  // namespace sop
