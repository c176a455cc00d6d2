#include "mobisynth/fudger.hpp"

#include <cmath>

#include "mobisynth/errors.hpp"
#include "mobisynth/rng.hpp"

namespace mobisynth {
namespace {

std::int64_t hour_bucket(std::int64_t unix_s) {
    std::int64_t q = unix_s / 3600;
    if (unix_s % 3600 < 0) --q;
    return q;
}

void check_radius(double grid_radius_m) {
    if (!(grid_radius_m > 0.0) || !std::isfinite(grid_radius_m))
        throw DomainError("grid radius must be positive");
}

// Uniform draw from the disk of radius offset_max, fixed by (seed, bucket).
void draw_offset(std::uint64_t seed, std::int64_t bucket, double radius_m,
                 double& north_m, double& east_m) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(bucket)));
    double r = offset_max_m(radius_m) * std::sqrt(rng.uniform(0.0, 1.0));
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    north_m = r * std::cos(theta);
    east_m = r * std::sin(theta);
}

}  // namespace

double offset_max_m(double grid_radius_m) {
    check_radius(grid_radius_m);
    return grid_radius_m / 4.0;
}

FudgerState make_fudger(double grid_radius_m, std::uint64_t seed,
                        std::int64_t now_unix_s) {
    check_radius(grid_radius_m);
    FudgerState s;
    s.grid_radius_m = grid_radius_m;
    s.seed = seed;
    s.epoch_hour = hour_bucket(now_unix_s);
    draw_offset(seed, s.epoch_hour, grid_radius_m, s.offset_north_m, s.offset_east_m);
    return s;
}

FudgerState roll_offset(const FudgerState& state, std::int64_t now_unix_s) {
    check_radius(state.grid_radius_m);
    std::int64_t bucket = hour_bucket(now_unix_s);
    if (bucket == state.epoch_hour) return state;
    FudgerState next = state;
    next.epoch_hour = bucket;
    draw_offset(state.seed, bucket, state.grid_radius_m, next.offset_north_m,
                next.offset_east_m);
    return next;
}

GeoPoint snap_to_grid(const GeoPoint& p, double grid_radius_m) {
    check_radius(grid_radius_m);
    validate(p);
    double dlat = grid_radius_m / kMetersPerDegree;
    double lat_c = (std::floor(p.lat / dlat) + 0.5) * dlat;
    double dlon = dlat / std::cos(lat_c * M_PI / 180.0);
    double lon_c = (std::floor(p.lon / dlon) + 0.5) * dlon;
    return {lat_c, lon_c};
}

GeoPoint fudge(const GeoPoint& p, const FudgerState& state, std::int64_t now_unix_s) {
    check_radius(state.grid_radius_m);
    validate(p);
    double north = 0.0, east = 0.0;
    draw_offset(state.seed, hour_bucket(now_unix_s), state.grid_radius_m, north, east);
    return snap_to_grid(offset_by_meters(p, north, east), state.grid_radius_m);
}

}  // namespace mobisynth
