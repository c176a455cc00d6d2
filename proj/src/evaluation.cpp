#include "mobisynth/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "mobisynth/errors.hpp"
#include "mobisynth/rng.hpp"

namespace mobisynth {
namespace {

double population_std(double sum, double sum_sq, std::size_t n) {
    double mean = sum / static_cast<double>(n);
    double var = sum_sq / static_cast<double>(n) - mean * mean;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

std::array<double, kFeatureCount> as_array(const FeatureVector& f) {
    return {f.max_accel, f.min_accel,     f.mean_accel,    f.std_accel, f.mean_abs_accel,
            f.std_abs_accel, f.max_speed, f.idle_time_s, f.distance_m};
}

std::string feature_csv_header() {
    return "max_accel,min_accel,mean_accel,std_accel,mean_abs_accel,std_abs_accel,"
           "max_speed,idle_time_s,distance_m";
}

std::string feature_csv_row(const FeatureVector& f) {
    char buf[256];
    auto a = as_array(f);
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f",
                  a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]);
    return buf;
}

FeatureVector extract_features(const std::vector<Fix>& fixes) {
    if (fixes.size() < 2)
        throw DomainError("feature extraction needs at least 2 fixes");

    FeatureVector f;
    f.max_accel = -std::numeric_limits<double>::infinity();
    f.min_accel = std::numeric_limits<double>::infinity();
    double sum = 0.0, sum_sq = 0.0, abs_sum = 0.0;
    for (const Fix& fx : fixes) {
        double a = fx.accel_mps2;
        f.max_accel = std::max(f.max_accel, a);
        f.min_accel = std::min(f.min_accel, a);
        sum += a;
        sum_sq += a * a;
        abs_sum += std::fabs(a);
        f.max_speed = std::max(f.max_speed, fx.speed_mps);
    }
    auto n = static_cast<double>(fixes.size());
    f.mean_accel = sum / n;
    f.std_accel = population_std(sum, sum_sq, fixes.size());
    f.mean_abs_accel = abs_sum / n;
    f.std_abs_accel = population_std(abs_sum, sum_sq, fixes.size());

    for (std::size_t i = 0; i + 1 < fixes.size(); ++i) {
        if (fixes[i].speed_mps < kIdleSpeedThresholdMps)
            f.idle_time_s +=
                static_cast<double>(fixes[i + 1].t_unix_s - fixes[i].t_unix_s);
        f.distance_m += haversine_distance(fixes[i].pos, fixes[i + 1].pos);
    }
    return f;
}

AbsAccelSummary summarize_abs_accel(const std::vector<std::vector<Fix>>& routes) {
    std::vector<double> pooled;
    for (const auto& r : routes)
        for (const Fix& fx : r) pooled.push_back(std::fabs(fx.accel_mps2));
    if (pooled.empty()) throw DomainError("no acceleration samples to summarize");

    double sum = 0.0, sum_sq = 0.0;
    for (double a : pooled) {
        sum += a;
        sum_sq += a * a;
    }
    AbsAccelSummary s;
    s.mean = sum / static_cast<double>(pooled.size());
    s.std = population_std(sum, sum_sq, pooled.size());
    std::sort(pooled.begin(), pooled.end());
    std::size_t mid = pooled.size() / 2;
    s.median = pooled.size() % 2 ? pooled[mid] : 0.5 * (pooled[mid - 1] + pooled[mid]);
    return s;
}

Trajectory perturb(const Trajectory& t, double speed_factor, double teleport_sigma_m,
                   std::uint64_t seed) {
    if (!(speed_factor >= 1.0))
        throw DomainError("speed factor must be at least 1");
    if (teleport_sigma_m < 0.0)
        throw DomainError("teleport sigma must be non-negative");

    Trajectory out = t;
    if (!out.fixes.empty()) {
        std::int64_t t0 = out.fixes.front().t_unix_s;
        for (Fix& fx : out.fixes) {
            fx.t_unix_s =
                t0 + std::llround(static_cast<double>(fx.t_unix_s - t0) / speed_factor);
            fx.speed_mps *= speed_factor;
            fx.accel_mps2 *= speed_factor * speed_factor;
        }
    }
    if (teleport_sigma_m > 0.0) {
        Rng rng(seed);
        for (Fix& fx : out.fixes) {
            double north = rng.normal(0.0, teleport_sigma_m);
            double east = rng.normal(0.0, teleport_sigma_m);
            fx.pos = offset_by_meters(fx.pos, north, east);
        }
    }
    return out;
}

int knn_classify(const std::vector<FeatureVector>& train, const std::vector<int>& labels,
                 int k, const FeatureVector& query) {
    if (train.empty()) throw DomainError("empty training set");
    if (labels.size() != train.size())
        throw DomainError("label count does not match training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.size())
        throw DomainError("k must be between 1 and the training set size");

    std::array<double, kFeatureCount> mean{}, scale{};
    std::vector<std::array<double, kFeatureCount>> rows;
    rows.reserve(train.size());
    for (const auto& f : train) rows.push_back(as_array(f));
    for (int c = 0; c < kFeatureCount; ++c) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& r : rows) {
            sum += r[static_cast<std::size_t>(c)];
            sum_sq += r[static_cast<std::size_t>(c)] * r[static_cast<std::size_t>(c)];
        }
        mean[static_cast<std::size_t>(c)] = sum / static_cast<double>(rows.size());
        double sd = population_std(sum, sum_sq, rows.size());
        // constant components carry no information; drop them from the metric
        scale[static_cast<std::size_t>(c)] = sd > 1e-12 ? 1.0 / sd : 0.0;
    }

    auto q = as_array(query);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double d2 = 0.0;
        for (int c = 0; c < kFeatureCount; ++c) {
            auto cc = static_cast<std::size_t>(c);
            double d = (rows[i][cc] - q[cc]) * scale[cc];
            d2 += d * d;
        }
        order.push_back({d2, i});
    }
    std::sort(order.begin(), order.end());

    std::map<int, int> votes;
    for (int i = 0; i < k; ++i) ++votes[labels[order[static_cast<std::size_t>(i)].second]];
    int best_label = labels[order[0].second];
    int best_count = 0;
    bool tied = false;
    for (const auto& [label, count] : votes) {
        if (count > best_count) {
            best_count = count;
            best_label = label;
            tied = false;
        } else if (count == best_count) {
            tied = true;
        }
    }
    return tied ? labels[order[0].second] : best_label;
}

double knn_holdout_accuracy(const std::vector<FeatureVector>& set_a,
                            const std::vector<FeatureVector>& set_b, int k,
                            double train_fraction, int iterations, std::uint64_t seed) {
    if (set_a.empty() || set_b.empty()) throw DomainError("both sets must be non-empty");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw DomainError("train fraction must be inside (0, 1)");
    if (iterations < 1) throw DomainError("need at least one iteration");

    auto split_point = [&](std::size_t n) {
        auto cut = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
        return std::min(std::max<std::size_t>(cut, 1), n - 1);
    };
    std::size_t cut_a = split_point(set_a.size());
    std::size_t cut_b = split_point(set_b.size());
    if (static_cast<std::size_t>(k) > cut_a + cut_b)
        throw DomainError("k exceeds the training split size");

    std::vector<std::size_t> idx_a(set_a.size()), idx_b(set_b.size());
    std::iota(idx_a.begin(), idx_a.end(), std::size_t{0});
    std::iota(idx_b.begin(), idx_b.end(), std::size_t{0});

    Rng rng(seed);
    double acc_sum = 0.0;
    for (int it = 0; it < iterations; ++it) {
        rng.shuffle(idx_a);
        rng.shuffle(idx_b);
        std::vector<FeatureVector> train;
        std::vector<int> labels;
        for (std::size_t i = 0; i < cut_a; ++i) {
            train.push_back(set_a[idx_a[i]]);
            labels.push_back(0);
        }
        for (std::size_t i = 0; i < cut_b; ++i) {
            train.push_back(set_b[idx_b[i]]);
            labels.push_back(1);
        }
        int correct = 0, total = 0;
        for (std::size_t i = cut_a; i < set_a.size(); ++i, ++total)
            correct += knn_classify(train, labels, k, set_a[idx_a[i]]) == 0;
        for (std::size_t i = cut_b; i < set_b.size(); ++i, ++total)
            correct += knn_classify(train, labels, k, set_b[idx_b[i]]) == 1;
        acc_sum += static_cast<double>(correct) / static_cast<double>(total);
    }
    return acc_sum / static_cast<double>(iterations);
}

}  // namespace mobisynth
