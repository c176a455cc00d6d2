#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mobisynth/geo.hpp"
#include "mobisynth/rng.hpp"
#include "mobisynth/traffic.hpp"

namespace mobisynth {

// Empirical driving-behavior envelope used when synthesizing per-second
// acceleration profiles. Defaults come from instrumented commute recordings:
// per-route mean |a| between 0.1 and 1.1 m/s^2, std of |a| between 0.4 and
// 1.1 m/s^2, hard acceleration bounds of +-7 m/s^2, and population targets
// mean 0.61, median 0.34, std 0.79 m/s^2.
struct DrivingStats {
    std::pair<double, double> mean_abs_bounds{0.1, 1.1};
    std::pair<double, double> std_abs_bounds{0.4, 1.1};
    std::pair<double, double> accel_bounds{-7.0, 7.0};
    double target_mean_abs = 0.61;
    double target_median_abs = 0.34;
    double target_std_abs = 0.79;
    // Accept a profile only when |mean(v) - d_step/t_step| falls below this.
    double objective_threshold_mps = 0.15;
    // Margin keeping the per-route lower mean-|a| draw strictly below the cap.
    double delta_margin = 0.1;
    int max_retries = 5;
};

// Second-by-second acceleration profile for one route step. speeds[j] is the
// speed after applying accel[j] to the previous speed (accel.size() ==
// speeds.size() == int(t_step)). v0 is the entry speed; because the profile's
// signed accelerations sum to zero the exit speed speeds.back() equals v0.
struct StepProfile {
    double v0 = 0.0;
    std::vector<double> accel;
    std::vector<double> speeds;
};

// One timestamped trajectory sample.
struct Fix {
    std::int64_t t_unix_s = 0;
    GeoPoint pos;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
};

// Draws the per-route mean-|a| window [m_rand, mean_abs_bounds.max] with
// m_rand ~ U(mean_abs_bounds.min, mean_abs_bounds.max - delta_margin). One
// draw is shared by every step of a route.
std::pair<double, double> draw_mean_abs_target(const DrivingStats& stats, Rng& rng);

// Synthesizes accelerations for one step: minimizes |mean(v) - d/t| subject
// to mean(a) = 0, mean|a| in mean_abs_range, std|a| within stats bounds and
// >= mean|a|, per-sample accel bounds, non-negative speeds, and v0 = 0 on the
// first step / v_N = 0 on the last. Rejected attempts are retried with a
// larger internal iteration budget and a fresh initial guess; after
// stats.max_retries failures throws SynthesisError carrying the best
// objective residual seen. t_step_s < 2 or negative inputs throw DomainError.
StepProfile synthesize_step_profile(const RouteStep& step, double v0, bool is_first,
                                    bool is_last,
                                    const std::pair<double, double>& mean_abs_range,
                                    const DrivingStats& stats, std::uint64_t seed);

// Lays a synthesized profile onto the step geometry: one fix per second, the
// first at start_unix_s on the start of the first step's polyline, each later
// fix advanced by the integrated speed with the total integrated distance
// rescaled onto the polyline length. Profile/step counts or chained entry
// speeds that do not line up throw ContractError.
std::vector<Fix> assemble_drive_segment(const std::vector<RouteStep>& steps,
                                        const std::vector<StepProfile>& profiles,
                                        std::int64_t start_unix_s);

// Straight-line walk sampled once per second at constant speed; the walk
// takes ceil(distance/speed) seconds and the final fix lands exactly on
// `to`. Identical endpoints yield a single stationary fix.
std::vector<Fix> synth_walk(const GeoPoint& from, const GeoPoint& to,
                            std::int64_t start_unix_s, double walk_speed_mps);

// Perturbs every fix position with independent zero-mean gaussian offsets of
// sigma_m meters per horizontal axis. sigma_m == 0 returns the input
// unchanged; timestamps, speeds and accelerations are never touched.
std::vector<Fix> add_gps_noise(const std::vector<Fix>& fixes, double sigma_m,
                               std::uint64_t seed);

}  // namespace mobisynth
