#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobisynth/identity.hpp"
#include "mobisynth/simplex.hpp"
#include "mobisynth/traffic.hpp"

namespace mobisynth {

inline constexpr int kMaxRouteLen = 16;
inline constexpr int kMaxRouteResamples = 8;
inline constexpr int kDefaultCorners = 5;
inline constexpr double kWalkSpeedMps = 1.4;

// Cycle through the machine for one day: starts and ends at state 0 and
// passes through state 1 (the day's anchor).
struct DayRoute {
    std::vector<int> states;
};

struct VisitTimes {
    double arrival_s = 0.0;
    double departure_s = 0.0;
};

// Seconds-of-day schedule over one route. times[i] belongs to
// route.states[i]; transit_s[i] is the leg between visits i and i+1 and
// equals times[i+1].arrival_s - times[i].departure_s exactly.
struct DaySchedule {
    DayRoute route;
    std::vector<VisitTimes> times;
    std::vector<double> transit_s;
};

// Successor of `current` under the bracketing rule: entries are cumulated
// in state-id order and state j is chosen when
// cumulative(j-1) < draw <= cumulative(j). Draws at or below zero resolve
// to the first positive entry. Throws DomainError on an all-zero row.
int sample_next_state(const Identity& identity, int current, double draw);

// Chain of states from home back to home with uniform (0,1] draws. Routes
// longer than kMaxRouteLen states, or missing the anchor, are resampled up
// to kMaxRouteResamples times before a DomainError.
DayRoute sample_day_route(const Identity& identity, std::uint64_t seed);

// Door-to-door travel estimate for one leg: drive between the states'
// nearest graph vertices under the pessimistic model, departing at the
// midpoint of `from`'s arrival window, plus both vertex walks. Identical
// vertices skip the provider and cost only the walks.
double transit_time_pessimistic(TrafficProvider& provider, const StateSpec& from,
                                const StateSpec& to, const RoadGraph& graph,
                                double walk_speed_mps = kWalkSpeedMps);

// Schedule polytope over variables (arrival_i, departure_i) per visit, in
// visit order. Pins arrival_0 = 0 and departure_last = 86399, bounds other
// arrivals to (window_min, window_max] as >= window_min + 1 s, requires
// dwell >= t_min per visit and exact transit equalities per leg. The
// objective vector must carry one coefficient per variable.
LinearProgram build_schedule_lp(const DayRoute& route, const Identity& identity,
                                const std::vector<double>& transit_s,
                                const std::vector<double>& objective);

// Every violated schedule constraint, one line each; empty means the
// schedule is valid for this identity.
std::vector<std::string> audit_schedule(const DaySchedule& schedule,
                                        const Identity& identity);

// Random point of the schedule polytope: n_corners distinct vertex
// solutions under i.i.d. U(-1,1) objectives (duplicate vertices are
// redrawn), mixed with exponential(1) weights normalized to sum 1. The
// result is audited before return; a failed audit is a ContractError. LP
// infeasibility propagates as InfeasibleError.
DaySchedule sample_schedule(const DayRoute& route, const Identity& identity,
                            TrafficProvider& provider, const RoadGraph& graph,
                            std::uint64_t seed, int n_corners = kDefaultCorners);

// Route sampling and scheduling in one step: on an infeasible route, draws
// a fresh route up to kMaxRouteResamples times before giving up.
DaySchedule sample_day_schedule(const Identity& identity, TrafficProvider& provider,
                                const RoadGraph& graph, std::uint64_t seed,
                                int n_corners = kDefaultCorners);

}  // namespace mobisynth
