#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mobisynth/kinematics.hpp"
#include "mobisynth/pipeline.hpp"

namespace mobisynth {

// A fix counts as idle below this speed.
inline constexpr double kIdleSpeedThresholdMps = 0.5;
inline constexpr int kFeatureCount = 9;

// Temporal fingerprint of one route or day. Spatial shape deliberately
// excluded: only how the thing moves, not where.
struct FeatureVector {
    double max_accel = 0.0;
    double min_accel = 0.0;
    double mean_accel = 0.0;
    double std_accel = 0.0;
    double mean_abs_accel = 0.0;
    double std_abs_accel = 0.0;
    double max_speed = 0.0;
    double idle_time_s = 0.0;
    double distance_m = 0.0;
};

std::array<double, kFeatureCount> as_array(const FeatureVector& f);
std::string feature_csv_header();
std::string feature_csv_row(const FeatureVector& f);

// Speeds and accelerations come from the per-fix annotations; idle time sums
// the seconds spent below the idle threshold (each inter-fix interval is
// attributed to its leading fix); distance sums great-circle hops. Needs at
// least 2 fixes.
FeatureVector extract_features(const std::vector<Fix>& fixes);

struct AbsAccelSummary {
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;
};

// Pooled statistics over every per-second |a| sample of every route.
AbsAccelSummary summarize_abs_accel(const std::vector<std::vector<Fix>>& routes);

// Detection probe: timestamps shrink by speed_factor around the first fix
// (speeds scale by the factor, accelerations by its square), then every
// position is displaced by independent per-axis gaussian noise of
// teleport_sigma_m. factor 1 with sigma 0 reproduces the input bit for bit.
// Compressed timestamps may collide; probe output is not a schedule.
Trajectory perturb(const Trajectory& t, double speed_factor, double teleport_sigma_m,
                   std::uint64_t seed);

// Majority label among the k nearest training vectors by Euclidean distance
// in z-score space (standardized with the training statistics; constant
// components are ignored). A tied vote falls back to the single nearest
// neighbor's label.
int knn_classify(const std::vector<FeatureVector>& train, const std::vector<int>& labels,
                 int k, const FeatureVector& query);

// Mean held-out accuracy of knn_classify telling set_a (label 0) from set_b
// (label 1) over `iterations` random stratified splits: train_fraction of
// each set trains, the rest is scored.
double knn_holdout_accuracy(const std::vector<FeatureVector>& set_a,
                            const std::vector<FeatureVector>& set_b, int k,
                            double train_fraction, int iterations, std::uint64_t seed);

}  // namespace mobisynth
