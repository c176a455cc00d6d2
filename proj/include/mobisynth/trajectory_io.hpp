#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mobisynth/pipeline.hpp"

namespace mobisynth {

// "YYYY-MM-DDTHH:MM:SSZ" for an epoch second. Proleptic Gregorian, UTC only.
std::string iso8601_utc(std::int64_t unix_s);

// "YYYY-MM-DD" with zero padding.
std::string date_string(const CivilDate& d);

// All three writers emit deterministic bytes: fixed key and attribute order,
// fixed numeric precision (7 decimals for coordinates, 5 for speeds and
// accelerations), '\n' newlines. Identical trajectories serialize
// identically on every platform.

// GeoJSON Feature holding one LineString. properties.times carries one epoch
// second per coordinate, so coordinates[i] pairs with times[i]; identity and
// date ride along as scalar properties.
std::string to_geojson(const Trajectory& t);

// GPX 1.1 document with a single track segment, one <trkpt> per fix with an
// ISO-8601 <time> child.
std::string to_gpx(const Trajectory& t);

// Header line "t_unix_s,lat,lon,speed_mps,accel_mps2", one row per fix. The
// acceleration lattice is 1/32 m/s^2, so 5 decimals round-trip the
// kinematics exactly.
std::string to_csv(const Trajectory& t);

// Parses to_csv output back into fixes. The header is required verbatim;
// malformed rows raise ParseError with their line number. Timestamps must be
// non-decreasing.
std::vector<Fix> parse_fix_csv(std::string_view text);

}  // namespace mobisynth
