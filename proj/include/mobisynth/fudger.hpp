#pragma once

#include <cstdint>

#include "mobisynth/geo.hpp"

namespace mobisynth {

// Block-level obfuscation is 500 m, city-level 5000 m; 2000 m mirrors the
// platform default the scheme is modeled on.
inline constexpr double kBlockGridM = 500.0;
inline constexpr double kCityGridM = 5000.0;
inline constexpr double kDefaultGridM = 2000.0;

// Immutable snapshot of the obfuscator: the offset belongs to epoch_hour and
// is a pure function of (seed, epoch_hour), magnitude at most
// offset_max_m(grid_radius_m).
struct FudgerState {
    double grid_radius_m = kDefaultGridM;
    double offset_north_m = 0.0;
    double offset_east_m = 0.0;
    std::int64_t epoch_hour = 0;
    std::uint64_t seed = 0;
};

// A quarter cell: enough to blur grid transitions without leaving the
// neighborhood of the true cell.
double offset_max_m(double grid_radius_m);

FudgerState make_fudger(double grid_radius_m, std::uint64_t seed,
                        std::int64_t now_unix_s = 0);

// Same hour bucket returns the state unchanged; a new bucket redraws the
// offset from (seed, bucket).
FudgerState roll_offset(const FudgerState& state, std::int64_t now_unix_s);

// Center of the lattice cell containing p. The lattice is anchored at
// (0, 0); cells span grid_radius_m of latitude, and their longitude span is
// widened by the cosine of the cell's own center latitude, so each latitude
// row carries a fixed longitude lattice.
GeoPoint snap_to_grid(const GeoPoint& p, double grid_radius_m);

// Offset for now's hour bucket, then snap. Within one bucket this is a pure
// function of p regardless of how state was rolled.
GeoPoint fudge(const GeoPoint& p, const FudgerState& state, std::int64_t now_unix_s);

}  // namespace mobisynth
