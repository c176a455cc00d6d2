#include "mobisynth/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mobisynth/errors.hpp"
#include "mobisynth/geo.hpp"
#include "mobisynth/rng.hpp"
#include "mobisynth/routing.hpp"

namespace mobisynth {

namespace {

constexpr double kDayEnd = 86399.0;

// Distinct derivation streams so one caller seed cannot correlate route
// draws with objective draws.
constexpr std::uint64_t kStreamRouteBase = 16;
constexpr std::uint64_t kStreamScheduleBase = 48;


std::string visit_tag(const Identity& identity, const DayRoute& route, std::size_t i) {
    const StateSpec& s = state_by_id(identity, route.states[i]);
    return "visit " + std::to_string(i) + " (" + s.label + ")";
}

void check_route_shape(const Identity& identity, const DayRoute& route) {
    if (route.states.size() < 3)
        throw DomainError("day route needs at least home, anchor, home");
    if (route.states.front() != 0 || route.states.back() != 0)
        throw DomainError("day route must start and end at state 0");
    if (std::find(route.states.begin(), route.states.end(), 1) == route.states.end())
        throw DomainError("day route must pass through state 1");
    for (int id : route.states) state_by_id(identity, id);
}

}  // namespace

int sample_next_state(const Identity& identity, int current, double draw) {
    const std::vector<double>& row =
        identity.transitions.at(static_cast<std::size_t>(current));
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] <= 0.0) continue;
        if (last_positive < 0 && draw <= 0.0) return static_cast<int>(j);
        cum += row[j];
        last_positive = static_cast<int>(j);
        if (draw <= cum) return static_cast<int>(j);
    }
    // Row sums to 1 up to rounding; draws above the last cumulative value
    // land on the final positive entry.
    if (last_positive >= 0) return last_positive;
    throw DomainError("state " + std::to_string(current) + " has no outgoing transitions");
}

DayRoute sample_day_route(const Identity& identity, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt <= kMaxRouteResamples; ++attempt) {
        std::vector<int> states{0};
        bool closed = false;
        while (static_cast<int>(states.size()) < kMaxRouteLen) {
            int next = sample_next_state(identity, states.back(), rng.uniform_pos());
            states.push_back(next);
            if (next == 0) {
                closed = true;
                break;
            }
        }
        if (closed &&
            std::find(states.begin(), states.end(), 1) != states.end())
            return DayRoute{std::move(states)};
    }
    throw DomainError("no day route of at most " + std::to_string(kMaxRouteLen) +
                      " states after " + std::to_string(1 + kMaxRouteResamples) +
                      " attempts");
}

double transit_time_pessimistic(TrafficProvider& provider, const StateSpec& from,
                                const StateSpec& to, const RoadGraph& graph,
                                double walk_speed_mps) {
    if (walk_speed_mps <= 0.0) throw DomainError("walk speed must be positive");
    std::int64_t v_from = nearest_vertex(graph, from.location);
    std::int64_t v_to = nearest_vertex(graph, to.location);
    double walk = haversine_distance(from.location, graph.vertices.at(v_from)) / walk_speed_mps +
                  haversine_distance(to.location, graph.vertices.at(v_to)) / walk_speed_mps;
    if (v_from == v_to) return walk;

    TrafficQuery q;
    q.waypoints = {from.location, to.location};
    q.departure_unix_s = static_cast<std::int64_t>(
        std::llround((from.arrival_earliest_s + from.arrival_latest_s) / 2.0));
    q.model = TrafficModel::pessimistic;
    double drive = 0.0;
    for (const RouteStep& s : provider.get_route(q)) drive += s.t_step_s;
    return walk + drive;
}

LinearProgram build_schedule_lp(const DayRoute& route, const Identity& identity,
                                const std::vector<double>& transit_s,
                                const std::vector<double>& objective) {
    check_route_shape(identity, route);
    std::size_t n_visits = route.states.size();
    if (transit_s.size() != n_visits - 1)
        throw DomainError("one transit time per leg required");
    std::size_t n = 2 * n_visits;  // (arrival, departure) per visit
    if (objective.size() != n)
        throw DomainError("objective needs one coefficient per time variable");

    LinearProgram lp;
    lp.objective = objective;
    lp.lower.assign(n, 0.0);
    lp.upper.assign(n, kDayEnd);

    for (std::size_t i = 0; i < n_visits; ++i) {
        const StateSpec& s = state_by_id(identity, route.states[i]);
        std::size_t a = 2 * i, d = 2 * i + 1;

        if (i == 0) {
            lp.lower[a] = lp.upper[a] = 0.0;  // day starts at home
        } else {
            lp.lower[a] = std::max(0.0, s.arrival_earliest_s + 1.0);
            lp.upper[a] = std::min(kDayEnd, s.arrival_latest_s);
        }
        if (i + 1 == n_visits) lp.lower[d] = lp.upper[d] = kDayEnd;

        // arrival - departure <= -t_min
        std::vector<double> dwell(n, 0.0);
        dwell[a] = 1.0;
        dwell[d] = -1.0;
        lp.ub_lhs.push_back(std::move(dwell));
        lp.ub_rhs.push_back(-s.t_min_s);
        lp.ub_names.push_back("dwell at " + visit_tag(identity, route, i));
    }

    for (std::size_t i = 0; i + 1 < n_visits; ++i) {
        std::vector<double> row(n, 0.0);
        row[2 * (i + 1)] = 1.0;  // next arrival
        row[2 * i + 1] = -1.0;   // this departure
        lp.eq_lhs.push_back(std::move(row));
        lp.eq_rhs.push_back(transit_s[i]);
        lp.eq_names.push_back("transit " + visit_tag(identity, route, i) + " to " +
                              visit_tag(identity, route, i + 1));
    }
    return lp;
}

std::vector<std::string> audit_schedule(const DaySchedule& schedule,
                                        const Identity& identity) {
    std::vector<std::string> violations;
    auto fail = [&](const std::string& msg) { violations.push_back(msg); };

    const std::vector<int>& states = schedule.route.states;
    if (states.size() < 3 || states.front() != 0 || states.back() != 0)
        fail("route does not form a home-to-home cycle");
    if (std::find(states.begin(), states.end(), 1) == states.end())
        fail("route skips the anchor state");
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        int a = states[i], b = states[i + 1];
        if (a < 0 || b < 0 || a >= static_cast<int>(identity.transitions.size()) ||
            b >= static_cast<int>(identity.transitions[a].size()) ||
            identity.transitions[a][b] <= 0.0)
            fail("leg " + std::to_string(i) + " uses a zero-probability transition");
    }
    if (schedule.times.size() != states.size()) {
        fail("one (arrival, departure) pair per visit required");
        return violations;
    }
    if (schedule.transit_s.size() + 1 != schedule.times.size()) {
        fail("one transit time per leg required");
        return violations;
    }

    const double eps = 1e-6;
    char buf[160];
    for (std::size_t i = 0; i < schedule.times.size(); ++i) {
        const VisitTimes& t = schedule.times[i];
        const StateSpec& s = state_by_id(identity, states[i]);
        std::string tag = visit_tag(identity, schedule.route, i);
        if (t.arrival_s < -eps || t.departure_s > kDayEnd + eps)
            fail(tag + " leaves the day bounds");
        if (t.departure_s < t.arrival_s - eps) fail(tag + " departs before arriving");
        if (t.departure_s - t.arrival_s < s.t_min_s - eps) {
            std::snprintf(buf, sizeof buf, "%s dwells %.3f s, needs %.0f s", tag.c_str(),
                          t.departure_s - t.arrival_s, s.t_min_s);
            fail(buf);
        }
        if (i == 0) {
            if (std::fabs(t.arrival_s) > eps) fail("first arrival is not midnight");
        } else {
            if (t.arrival_s < s.arrival_earliest_s + 1.0 - eps ||
                t.arrival_s > s.arrival_latest_s + eps) {
                std::snprintf(buf, sizeof buf,
                              "%s arrives at %.3f s outside (%.0f, %.0f]", tag.c_str(),
                              t.arrival_s, s.arrival_earliest_s, s.arrival_latest_s);
                fail(buf);
            }
        }
    }
    if (!schedule.times.empty() &&
        std::fabs(schedule.times.back().departure_s - kDayEnd) > eps)
        fail("last departure is not the end of day");
    for (std::size_t i = 0; i + 1 < schedule.times.size(); ++i) {
        double gap = schedule.times[i + 1].arrival_s - schedule.times[i].departure_s;
        if (std::fabs(gap - schedule.transit_s[i]) > eps) {
            std::snprintf(buf, sizeof buf,
                          "leg %zu spans %.6f s, transit says %.6f s", i, gap,
                          schedule.transit_s[i]);
            fail(buf);
        }
    }
    return violations;
}

DaySchedule sample_schedule(const DayRoute& route, const Identity& identity,
                            TrafficProvider& provider, const RoadGraph& graph,
                            std::uint64_t seed, int n_corners) {
    check_route_shape(identity, route);
    if (n_corners < 1) throw DomainError("n_corners must be at least 1");

    std::size_t n_visits = route.states.size();
    std::vector<double> transit(n_visits - 1);
    for (std::size_t i = 0; i + 1 < n_visits; ++i)
        transit[i] =
            transit_time_pessimistic(provider, state_by_id(identity, route.states[i]),
                                     state_by_id(identity, route.states[i + 1]), graph);

    Rng rng(seed);
    std::size_t n = 2 * n_visits;
    std::vector<std::vector<double>> corners;
    corners.reserve(static_cast<std::size_t>(n_corners));
    // Random objectives can land on an already-found vertex; those draws are
    // rejected so the mix spans distinct corners. A polytope with fewer
    // vertices than n_corners exhausts the attempt budget and mixes what it
    // found (a fully pinned schedule is the extreme case).
    int attempts_left = 16 + 4 * n_corners;
    while (static_cast<int>(corners.size()) < n_corners && attempts_left-- > 0) {
        std::vector<double> c(n);
        for (double& ci : c) ci = rng.uniform(-1.0, 1.0);
        std::vector<double> x =
            solve_lp(build_schedule_lp(route, identity, transit, c)).x;
        bool fresh = true;
        for (const std::vector<double>& seen : corners) {
            double gap = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                gap = std::max(gap, std::fabs(seen[j] - x[j]));
            if (gap < 1e-6) fresh = false;
        }
        if (fresh) corners.push_back(std::move(x));
    }

    std::vector<double> weights(corners.size());
    double total = 0.0;
    for (double& w : weights) {
        w = rng.exponential(1.0);
        total += w;
    }

    std::vector<double> mix(n, 0.0);
    for (std::size_t k = 0; k < corners.size(); ++k)
        for (std::size_t j = 0; j < n; ++j) mix[j] += weights[k] / total * corners[k][j];

    DaySchedule schedule;
    schedule.route = route;
    schedule.transit_s = std::move(transit);
    schedule.times.resize(n_visits);
    for (std::size_t i = 0; i < n_visits; ++i) {
        schedule.times[i].arrival_s = mix[2 * i];
        schedule.times[i].departure_s = mix[2 * i + 1];
    }

    std::vector<std::string> violations = audit_schedule(schedule, identity);
    if (!violations.empty()) {
        std::string msg = "mixed schedule failed its audit:";
        for (const std::string& v : violations) msg += "\n  " + v;
        throw ContractError(msg);
    }
    return schedule;
}

DaySchedule sample_day_schedule(const Identity& identity, TrafficProvider& provider,
                                const RoadGraph& graph, std::uint64_t seed,
                                int n_corners) {
    for (int attempt = 0;; ++attempt) {
        DayRoute route =
            sample_day_route(identity, mix_seed(seed, kStreamRouteBase + attempt));
        try {
            return sample_schedule(route, identity, provider, graph,
                                   mix_seed(seed, kStreamScheduleBase + attempt),
                                   n_corners);
        } catch (const InfeasibleError&) {
            if (attempt >= kMaxRouteResamples) throw;
        }
    }
}

}  // namespace mobisynth
