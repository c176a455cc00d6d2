#include "mobisynth/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "mobisynth/errors.hpp"
#include "mobisynth/routing.hpp"

namespace mobisynth {
namespace {

constexpr std::int64_t kDayLenS = 86400;

// Derivation streams: 1 schedule, 2 gps noise, 64+i per-leg kinematics.
constexpr std::uint64_t kStreamSchedule = 1;
constexpr std::uint64_t kStreamNoise = 2;
constexpr std::uint64_t kStreamLegBase = 64;

void validate_date(const CivilDate& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw DomainError("calendar date out of range");
}

Fix still_fix(std::int64_t t, const GeoPoint& where) {
    Fix f;
    f.t_unix_s = t;
    f.pos = where;
    f.speed_mps = 0.0;
    f.accel_mps2 = 0.0;
    return f;
}

}  // namespace

std::int64_t days_from_civil(const CivilDate& date) {
    validate_date(date);
    std::int64_t y = date.year;
    unsigned m = static_cast<unsigned>(date.month);
    unsigned d = static_cast<unsigned>(date.day);
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t unix_from_civil(const CivilDate& date) {
    return days_from_civil(date) * kDayLenS;
}

int day_of_week(const CivilDate& date) {
    std::int64_t days = days_from_civil(date);
    return static_cast<int>(((days + 4) % 7 + 7) % 7);
}

bool is_weekday(const CivilDate& date) {
    int dow = day_of_week(date);
    return dow >= 1 && dow <= 5;
}

const Identity& pick_machine(const UserModel& user, const CivilDate& date) {
    return is_weekday(date) ? user.weekday : user.weekend;
}

Trajectory synthesize_day(const Identity& identity, const CivilDate& date,
                          const RoadGraph& graph, TrafficProvider& provider,
                          const DayConfig& cfg, std::uint64_t seed) {
    validate_date(date);
    if (cfg.idle_period_s <= 0) throw DomainError("idle period must be positive");
    if (!(cfg.walk_speed_mps > 0.0)) throw DomainError("walk speed must be positive");
    if (cfg.noise_sigma_m < 0.0) throw DomainError("noise sigma must be non-negative");

    const std::int64_t epoch = unix_from_civil(date);
    const std::int64_t day_end = epoch + kDayLenS - 1;

    DaySchedule sched = sample_day_schedule(identity, provider, graph,
                                            mix_seed(seed, kStreamSchedule),
                                            cfg.n_corners);

    Trajectory out;
    out.day = date;
    out.identity_ref = identity.weekday ? "weekday" : "weekend";

    std::vector<Fix> fixes;
    std::vector<TrajectorySegment> segments;
    auto push_segment = [&](SegmentKind kind, std::vector<Fix>&& fx) {
        if (fx.empty()) return;
        std::size_t begin = fixes.size();
        fixes.insert(fixes.end(), fx.begin(), fx.end());
        if (!segments.empty() && segments.back().kind == kind &&
            segments.back().end == begin) {
            segments.back().end = fixes.size();
        } else {
            segments.push_back({kind, begin, fixes.size()});
        }
    };
    // Stationary fixes strictly after after_t up to and including until_t.
    auto idle_until = [&](std::int64_t after_t, std::int64_t until_t,
                          const GeoPoint& where) {
        std::vector<Fix> fx;
        for (std::int64_t t = after_t + cfg.idle_period_s; t < until_t;
             t += cfg.idle_period_s)
            fx.push_back(still_fix(t, where));
        if (until_t > after_t) fx.push_back(still_fix(until_t, where));
        return fx;
    };

    const auto n_visits = sched.route.states.size();
    const StateSpec& first_state = state_by_id(identity, sched.route.states[0]);

    // Day opens dwelling at the first state.
    {
        std::vector<Fix> fx;
        fx.push_back(still_fix(epoch, first_state.location));
        push_segment(SegmentKind::idle, std::move(fx));
    }

    std::int64_t cursor = epoch;  // time of the last emitted fix

    for (std::size_t i = 0; i + 1 < n_visits; ++i) {
        const StateSpec& from = state_by_id(identity, sched.route.states[i]);
        const StateSpec& to = state_by_id(identity, sched.route.states[i + 1]);

        std::int64_t scheduled_dep = epoch + std::llround(sched.times[i].departure_s);
        std::int64_t dep = std::max(scheduled_dep, cursor);

        // dwell at the origin until departure
        push_segment(SegmentKind::idle, idle_until(cursor, dep, from.location));
        cursor = std::max(cursor, dep);

        std::int64_t v_from = nearest_vertex(graph, from.location);
        std::int64_t v_to = nearest_vertex(graph, to.location);

        if (v_from == v_to) {
            if (haversine_distance(from.location, to.location) > 1e-6) {
                auto walk = synth_walk(from.location, to.location, cursor,
                                       cfg.walk_speed_mps);
                cursor = walk.back().t_unix_s;
                push_segment(SegmentKind::walk, std::move(walk));
            }
            continue;
        }

        const GeoPoint& vp_from = graph.vertices.at(v_from);
        const GeoPoint& vp_to = graph.vertices.at(v_to);

        if (haversine_distance(from.location, vp_from) > 1e-6) {
            auto walk = synth_walk(from.location, vp_from, cursor, cfg.walk_speed_mps);
            cursor = walk.back().t_unix_s;
            push_segment(SegmentKind::walk, std::move(walk));
        }

        PathResult path = fastest_path(graph, v_from, v_to);
        TrafficQuery query;
        query.waypoints =
            split_waypoints(path, graph, cfg.max_waypoints, cfg.turn_threshold_deg);
        query.departure_unix_s = scheduled_dep;
        query.model = TrafficModel::best_guess;
        std::vector<RouteStep> steps = provider.get_route(query);

        Rng leg_rng(mix_seed(seed, kStreamLegBase + i));
        auto mean_range = draw_mean_abs_target(cfg.driving, leg_rng);
        std::vector<StepProfile> profiles;
        profiles.reserve(steps.size());
        double v0 = 0.0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            try {
                profiles.push_back(synthesize_step_profile(
                    steps[k], v0, k == 0, k + 1 == steps.size(), mean_range,
                    cfg.driving, leg_rng.bits()));
            } catch (const SynthesisError& e) {
                char buf[256];
                std::snprintf(buf, sizeof(buf), "leg %zu (%s to %s), step %zu: %s", i,
                              from.label.c_str(), to.label.c_str(), k, e.what());
                throw SynthesisError(buf, e.best_residual());
            }
            v0 = profiles.back().speeds.back();
        }

        auto drive = assemble_drive_segment(steps, profiles, cursor + 1);
        cursor = drive.back().t_unix_s;
        push_segment(SegmentKind::drive, std::move(drive));

        if (haversine_distance(vp_to, to.location) > 1e-6) {
            auto walk = synth_walk(vp_to, to.location, cursor, cfg.walk_speed_mps);
            cursor = walk.back().t_unix_s;
            push_segment(SegmentKind::walk, std::move(walk));
        }
    }

    // dwell at the final state until the end of the day
    const StateSpec& last_state =
        state_by_id(identity, sched.route.states[n_visits - 1]);
    push_segment(SegmentKind::idle, idle_until(cursor, day_end, last_state.location));

    out.fixes = add_gps_noise(fixes, cfg.noise_sigma_m, mix_seed(seed, kStreamNoise));
    out.segments = std::move(segments);
    return out;
}

}  // namespace mobisynth
