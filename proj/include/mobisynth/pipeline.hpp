#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobisynth/identity.hpp"
#include "mobisynth/kinematics.hpp"
#include "mobisynth/osm.hpp"
#include "mobisynth/schedule.hpp"
#include "mobisynth/traffic.hpp"

namespace mobisynth {

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
};

// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(const CivilDate& date);
std::int64_t unix_from_civil(const CivilDate& date);
// 0 = Sunday .. 6 = Saturday.
int day_of_week(const CivilDate& date);
bool is_weekday(const CivilDate& date);
// Weekday machine Monday through Friday, weekend machine otherwise.
const Identity& pick_machine(const UserModel& user, const CivilDate& date);

enum class SegmentKind { walk, drive, idle };

// Half-open fix index range [begin, end); spans tile the fix sequence.
struct TrajectorySegment {
    SegmentKind kind = SegmentKind::idle;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Trajectory {
    std::vector<Fix> fixes;
    std::vector<TrajectorySegment> segments;
    CivilDate day;
    std::string identity_ref;
};

struct DayConfig {
    int n_corners = kDefaultCorners;
    double walk_speed_mps = kWalkSpeedMps;
    double noise_sigma_m = 3.0;
    // One stationary fix per this many seconds while dwelling at a state.
    int idle_period_s = 60;
    std::size_t max_waypoints = 23;
    double turn_threshold_deg = 30.0;
    DrivingStats driving;
};

// One full synthetic day, 00:00 to 23:59: samples the route and schedule,
// realizes each leg as walk / drive / walk with live-traffic steps priced at
// the scheduled departure, fills dwells with idle fixes, then perturbs every
// position with GPS noise. The schedule is built from pessimistic transit
// estimates while legs run on best-guess times, so slack accumulates as idle
// at the destination and any overrun pushes the realized times later:
// realized times are authoritative in the output.
Trajectory synthesize_day(const Identity& identity, const CivilDate& date,
                          const RoadGraph& graph, TrafficProvider& provider,
                          const DayConfig& cfg, std::uint64_t seed);

}  // namespace mobisynth
