#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mobisynth/errors.hpp"
#include "mobisynth/evaluation.hpp"
#include "mobisynth/geo.hpp"
#include "mobisynth/rng.hpp"

using namespace mobisynth;

namespace {

Fix make_fix(std::int64_t t, GeoPoint pos, double speed, double accel) {
    Fix f;
    f.t_unix_s = t;
    f.pos = pos;
    f.speed_mps = speed;
    f.accel_mps2 = accel;
    return f;
}

// Straight east-bound track with per-second fixes at the given speeds;
// accelerations are forward differences (last one zero).
std::vector<Fix> track_from_speeds(const std::vector<double>& speeds,
                                   std::int64_t t0 = 1000) {
    std::vector<Fix> fixes;
    GeoPoint p{52.0, 13.0};
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        double a = i + 1 < speeds.size() ? speeds[i + 1] - speeds[i] : 0.0;
        fixes.push_back(make_fix(t0 + static_cast<std::int64_t>(i), p, speeds[i], a));
        p = offset_by_meters(p, 0.0, speeds[i]);
    }
    return fixes;
}

// Two-pass reference: textbook mean/std formulas, no shared accumulators with
// the implementation under test.
double naive_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double naive_std(const std::vector<double>& xs) {
    double m = naive_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

bool fixes_identical(const std::vector<Fix>& a, const std::vector<Fix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].t_unix_s != b[i].t_unix_s) return false;
        if (a[i].pos != b[i].pos) return false;
        if (a[i].speed_mps != b[i].speed_mps) return false;
        if (a[i].accel_mps2 != b[i].accel_mps2) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("constant-speed cruise has zero accel spread and no idle time") {
    std::vector<Fix> fixes = track_from_speeds(std::vector<double>(30, 10.0));
    FeatureVector f = extract_features(fixes);

    CHECK(f.max_accel == 0.0);
    CHECK(f.min_accel == 0.0);
    CHECK(f.mean_accel == 0.0);
    CHECK(f.std_accel == 0.0);
    CHECK(f.mean_abs_accel == 0.0);
    CHECK(f.std_abs_accel == 0.0);
    CHECK(f.max_speed == 10.0);
    CHECK(f.idle_time_s == 0.0);
    // 29 hops of 10 m each
    CHECK(f.distance_m == doctest::Approx(290.0).epsilon(1e-4));
}

TEST_CASE("a parked trace is pure idle time") {
    std::vector<Fix> fixes;
    for (int i = 0; i <= 120; i += 15)
        fixes.push_back(make_fix(500 + i, {52.0, 13.0}, 0.0, 0.0));
    FeatureVector f = extract_features(fixes);

    CHECK(f.max_speed == 0.0);
    CHECK(f.idle_time_s == 120.0);
    CHECK(f.distance_m == 0.0);
    CHECK(f.std_accel == 0.0);
}

TEST_CASE("acceleration statistics match a two-pass reference") {
    std::vector<double> accels = {1.0, -1.0, 2.0, 0.0, -0.5, 0.25, 3.0, -2.25};
    std::vector<Fix> fixes;
    for (std::size_t i = 0; i < accels.size(); ++i)
        fixes.push_back(
            make_fix(static_cast<std::int64_t>(i), {52.0, 13.0}, 5.0, accels[i]));

    FeatureVector f = extract_features(fixes);
    CHECK(f.max_accel == 3.0);
    CHECK(f.min_accel == -2.25);
    CHECK(f.mean_accel == doctest::Approx(naive_mean(accels)).epsilon(1e-12));
    CHECK(f.std_accel == doctest::Approx(naive_std(accels)).epsilon(1e-12));

    std::vector<double> abs_accels;
    for (double a : accels) abs_accels.push_back(std::fabs(a));
    CHECK(f.mean_abs_accel == doctest::Approx(naive_mean(abs_accels)).epsilon(1e-12));
    CHECK(f.std_abs_accel == doctest::Approx(naive_std(abs_accels)).epsilon(1e-12));
}

TEST_CASE("each inter-fix interval is idle iff its leading fix is slow") {
    std::vector<Fix> fixes = {
        make_fix(0, {52.0, 13.0}, 0.4, 0.0),   // [0, 5) idle
        make_fix(5, {52.0, 13.0}, 10.0, 0.0),  // [5, 12) moving
        make_fix(12, {52.0, 13.0}, 0.3, 0.0),  // [12, 20) idle
        make_fix(20, {52.0, 13.0}, 0.2, 0.0),  // trailing fix, no interval
    };
    CHECK(extract_features(fixes).idle_time_s == 13.0);

    // threshold is strict: exactly 0.5 m/s is not idle
    fixes[0].speed_mps = kIdleSpeedThresholdMps;
    CHECK(extract_features(fixes).idle_time_s == 8.0);
}

TEST_CASE("features ignore the absolute epoch") {
    std::vector<double> speeds;
    Rng rng(404);
    speeds.push_back(0.0);
    for (int i = 0; i < 40; ++i)
        speeds.push_back(std::max(0.0, speeds.back() + rng.uniform(-2.0, 3.0)));

    std::vector<Fix> a = track_from_speeds(speeds, 0);
    std::vector<Fix> b = track_from_speeds(speeds, 1684108800);
    auto fa = as_array(extract_features(a));
    auto fb = as_array(extract_features(b));
    for (int i = 0; i < kFeatureCount; ++i) CHECK(fa[i] == fb[i]);
}

TEST_CASE("feature extraction needs two fixes") {
    CHECK_THROWS_AS(extract_features({}), DomainError);
    CHECK_THROWS_AS(extract_features({make_fix(0, {52.0, 13.0}, 1.0, 0.0)}),
                    DomainError);
}

TEST_CASE("csv header and row stay in feature order") {
    FeatureVector f;
    f.max_accel = 1.5;
    f.min_accel = -2.5;
    f.mean_accel = 0.125;
    f.std_accel = 0.75;
    f.mean_abs_accel = 0.5;
    f.std_abs_accel = 0.25;
    f.max_speed = 13.5;
    f.idle_time_s = 42.0;
    f.distance_m = 1234.5;

    auto arr = as_array(f);
    CHECK(arr.size() == 9);
    CHECK(arr[0] == 1.5);
    CHECK(arr[3] == 0.75);
    CHECK(arr[8] == 1234.5);

    CHECK(feature_csv_header() ==
          "max_accel,min_accel,mean_accel,std_accel,mean_abs_accel,std_abs_accel,"
          "max_speed,idle_time_s,distance_m");
    std::string row = feature_csv_row(f);
    CHECK(row ==
          "1.500000,-2.500000,0.125000,0.750000,0.500000,0.250000,13.500000,42.000,"
          "1234.500");
    // same comma count, so rows line up under the header
    std::string header = feature_csv_header();
    CHECK(std::count(row.begin(), row.end(), ',') ==
          std::count(header.begin(), header.end(), ','));
}

TEST_CASE("constant |a| routes summarize to a zero-spread pool") {
    std::vector<Fix> route;
    for (int i = 0; i < 10; ++i)
        route.push_back(make_fix(i, {52.0, 13.0}, 5.0, i % 2 ? 0.5 : -0.5));

    AbsAccelSummary s = summarize_abs_accel({route});
    CHECK(s.mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pooled summary matches a flat independent computation") {
    Rng rng(99);
    std::vector<std::vector<Fix>> routes;
    std::vector<double> pool;
    for (int r = 0; r < 7; ++r) {
        std::vector<Fix> route;
        int n = 3 + static_cast<int>(rng.index(20));
        for (int i = 0; i < n; ++i) {
            double a = rng.normal(0.0, 1.2);
            route.push_back(make_fix(i, {52.0, 13.0}, 5.0, a));
            pool.push_back(std::fabs(a));
        }
        routes.push_back(route);
    }

    AbsAccelSummary s = summarize_abs_accel(routes);
    CHECK(s.mean == doctest::Approx(naive_mean(pool)).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(naive_std(pool)).epsilon(1e-12));

    std::sort(pool.begin(), pool.end());
    double med = pool.size() % 2 ? pool[pool.size() / 2]
                                 : 0.5 * (pool[pool.size() / 2 - 1] + pool[pool.size() / 2]);
    CHECK(s.median == doctest::Approx(med).epsilon(1e-12));

    // route boundaries are irrelevant: pooling is over fixes, not routes
    std::vector<Fix> merged;
    for (const auto& r : routes) merged.insert(merged.end(), r.begin(), r.end());
    AbsAccelSummary flat = summarize_abs_accel({merged});
    CHECK(flat.mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(flat.median == doctest::Approx(s.median).epsilon(1e-12));
    CHECK(flat.std == doctest::Approx(s.std).epsilon(1e-12));

    CHECK_THROWS_AS(summarize_abs_accel({}), DomainError);
    CHECK_THROWS_AS(summarize_abs_accel({{}, {}}), DomainError);
}

TEST_CASE("a unit perturbation reproduces the input bit for bit") {
    Rng rng(7);
    Trajectory t;
    t.identity_ref = "weekday";
    for (int i = 0; i < 50; ++i)
        t.fixes.push_back(make_fix(1000 + 3 * i,
                                   {52.0 + rng.uniform() * 0.01, 13.0 + rng.uniform() * 0.01},
                                   rng.uniform(0.0, 15.0), rng.uniform(-3.0, 3.0)));

    Trajectory u = perturb(t, 1.0, 0.0, 12345);
    CHECK(fixes_identical(t.fixes, u.fixes));
    CHECK(u.identity_ref == t.identity_ref);
    // the seed is unused when sigma is zero
    Trajectory v = perturb(t, 1.0, 0.0, 54321);
    CHECK(fixes_identical(t.fixes, v.fixes));
}

TEST_CASE("factor-5 compression scales time, speed and acceleration exactly") {
    std::vector<double> speeds;
    for (int i = 0; i <= 20; ++i) speeds.push_back(static_cast<double>(i % 11));
    Trajectory t;
    t.fixes = track_from_speeds(speeds, 2000);
    // stretch to 5 s sampling so the compressed timestamps stay integral
    for (std::size_t i = 0; i < t.fixes.size(); ++i)
        t.fixes[i].t_unix_s = 2000 + 5 * static_cast<std::int64_t>(i);

    Trajectory u = perturb(t, 5.0, 0.0, 0);
    std::int64_t dur_before = t.fixes.back().t_unix_s - t.fixes.front().t_unix_s;
    std::int64_t dur_after = u.fixes.back().t_unix_s - u.fixes.front().t_unix_s;
    CHECK(dur_after * 5 == dur_before);
    CHECK(u.fixes.front().t_unix_s == t.fixes.front().t_unix_s);

    for (std::size_t i = 0; i < t.fixes.size(); ++i) {
        CHECK(u.fixes[i].t_unix_s ==
              2000 + static_cast<std::int64_t>(i));  // 5 s steps -> 1 s steps
        CHECK(u.fixes[i].speed_mps == 5.0 * t.fixes[i].speed_mps);
        CHECK(u.fixes[i].accel_mps2 == 25.0 * t.fixes[i].accel_mps2);
        CHECK(u.fixes[i].pos == t.fixes[i].pos);
    }

    CHECK(extract_features(u.fixes).max_speed ==
          5.0 * extract_features(t.fixes).max_speed);
}

TEST_CASE("teleport noise displaces each axis by roughly sigma") {
    Trajectory t;
    for (int i = 0; i < 10000; ++i)
        t.fixes.push_back(make_fix(i, {52.0, 13.0}, 5.0, 0.0));

    const double sigma = 1000.0;
    Trajectory u = perturb(t, 1.0, sigma, 2024);

    std::vector<double> north, east;
    for (std::size_t i = 0; i < t.fixes.size(); ++i) {
        north.push_back((u.fixes[i].pos.lat - t.fixes[i].pos.lat) * kMetersPerDegree);
        east.push_back((u.fixes[i].pos.lon - t.fixes[i].pos.lon) * kMetersPerDegree *
                       std::cos(t.fixes[i].pos.lat * M_PI / 180.0));
    }
    CHECK(std::fabs(naive_mean(north)) < 3.0 * sigma / 100.0);
    CHECK(std::fabs(naive_mean(east)) < 3.0 * sigma / 100.0);
    CHECK(naive_std(north) > 900.0);
    CHECK(naive_std(north) < 1100.0);
    CHECK(naive_std(east) > 900.0);
    CHECK(naive_std(east) < 1100.0);

    // same seed, same displacement field
    Trajectory v = perturb(t, 1.0, sigma, 2024);
    CHECK(fixes_identical(u.fixes, v.fixes));
    Trajectory w = perturb(t, 1.0, sigma, 2025);
    CHECK(!fixes_identical(u.fixes, w.fixes));
}

TEST_CASE("perturbation rejects shrinking factors and negative noise") {
    Trajectory t;
    t.fixes.push_back(make_fix(0, {52.0, 13.0}, 1.0, 0.0));
    CHECK_THROWS_AS(perturb(t, 0.5, 0.0, 0), DomainError);
    CHECK_THROWS_AS(perturb(t, 0.0, 0.0, 0), DomainError);
    CHECK_THROWS_AS(perturb(t, 1.0, -1.0, 0), DomainError);
}

namespace {

FeatureVector fv(double max_speed, double distance) {
    FeatureVector f;
    f.max_speed = max_speed;
    f.distance_m = distance;
    return f;
}

}  // namespace

TEST_CASE("an exact duplicate in training decides a 1-NN query") {
    std::vector<FeatureVector> train = {fv(10.0, 100.0), fv(12.0, 220.0),
                                        fv(30.0, 4000.0), fv(28.0, 3800.0)};
    std::vector<int> labels = {0, 0, 1, 1};
    CHECK(knn_classify(train, labels, 1, train[1]) == 0);
    CHECK(knn_classify(train, labels, 1, train[2]) == 1);
}

TEST_CASE("a tied vote falls back to the nearest neighbor") {
    std::vector<FeatureVector> train = {fv(10.0, 100.0), fv(20.0, 100.0)};
    std::vector<int> labels = {3, 8};
    FeatureVector near_first = fv(11.0, 100.0);
    FeatureVector near_second = fv(19.0, 100.0);
    CHECK(knn_classify(train, labels, 2, near_first) == 3);
    CHECK(knn_classify(train, labels, 2, near_second) == 8);
}

TEST_CASE("distances are taken in standardized space") {
    // Raw Euclidean distance would be dominated by distance_m and put the
    // query with class 1; standardization weighs both features equally and
    // the max_speed agreement wins.
    std::vector<FeatureVector> train = {fv(10.0, 1000.0), fv(10.2, 1130.0),
                                        fv(30.0, 1054.0), fv(29.8, 1100.0)};
    std::vector<int> labels = {0, 0, 1, 1};
    FeatureVector query = fv(10.1, 1055.0);

    double raw_best = 1e300;
    int raw_label = -1;
    for (std::size_t i = 0; i < train.size(); ++i) {
        double ds = train[i].max_speed - query.max_speed;
        double dd = train[i].distance_m - query.distance_m;
        double d = ds * ds + dd * dd;
        if (d < raw_best) {
            raw_best = d;
            raw_label = labels[i];
        }
    }
    CHECK(raw_label == 1);  // the trap is live
    CHECK(knn_classify(train, labels, 1, query) == 0);
}

TEST_CASE("constant feature columns do not poison the metric") {
    // idle_time_s is identical everywhere; with a naive 1/std weight it
    // would divide by zero and make every distance NaN.
    std::vector<FeatureVector> train;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
        FeatureVector f = fv(i < 3 ? 10.0 + i : 30.0 + i, 500.0 * (1 + i));
        f.idle_time_s = 777.0;
        train.push_back(f);
        labels.push_back(i < 3 ? 0 : 1);
    }
    FeatureVector q = fv(11.0, 900.0);
    q.idle_time_s = 777.0;
    CHECK(knn_classify(train, labels, 1, q) == 0);
    CHECK(knn_classify(train, labels, 3, q) == 0);
}

TEST_CASE("classifier argument validation") {
    std::vector<FeatureVector> train = {fv(1.0, 1.0), fv(2.0, 2.0)};
    std::vector<int> labels = {0, 1};
    CHECK_THROWS_AS(knn_classify({}, {}, 1, fv(1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(knn_classify(train, {0}, 1, fv(1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(knn_classify(train, labels, 0, fv(1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(knn_classify(train, labels, 3, fv(1.0, 1.0)), DomainError);
}

TEST_CASE("identically distributed sets are indistinguishable to the probe") {
    Rng rng(515);
    auto draw = [&] {
        FeatureVector f;
        f.max_accel = rng.uniform(2.0, 7.0);
        f.min_accel = -rng.uniform(2.0, 7.0);
        f.mean_accel = rng.normal(0.0, 0.05);
        f.std_accel = rng.uniform(0.5, 1.5);
        f.mean_abs_accel = rng.uniform(0.3, 0.9);
        f.std_abs_accel = rng.uniform(0.4, 1.0);
        f.max_speed = rng.uniform(8.0, 16.0);
        f.idle_time_s = rng.uniform(0.0, 3000.0);
        f.distance_m = rng.uniform(2000.0, 9000.0);
        return f;
    };
    std::vector<FeatureVector> set_a, set_b;
    for (int i = 0; i < 40; ++i) set_a.push_back(draw());
    for (int i = 0; i < 40; ++i) set_b.push_back(draw());

    double acc1 = knn_holdout_accuracy(set_a, set_b, 1, 0.9, 400, 1);
    double acc10 = knn_holdout_accuracy(set_a, set_b, 10, 0.9, 400, 2);
    CHECK(acc1 > 0.40);
    CHECK(acc1 < 0.60);
    CHECK(acc10 > 0.40);
    CHECK(acc10 < 0.60);
}

TEST_CASE("well-separated sets are told apart almost perfectly") {
    Rng rng(616);
    std::vector<FeatureVector> slow, fast;
    for (int i = 0; i < 30; ++i) {
        slow.push_back(fv(rng.uniform(5.0, 8.0), rng.uniform(500.0, 900.0)));
        fast.push_back(fv(rng.uniform(25.0, 30.0), rng.uniform(8000.0, 9000.0)));
    }
    CHECK(knn_holdout_accuracy(slow, fast, 1, 0.9, 50, 3) > 0.99);
    CHECK(knn_holdout_accuracy(slow, fast, 10, 0.8, 50, 4) > 0.99);
}

TEST_CASE("holdout harness is seeded and validates its arguments") {
    std::vector<FeatureVector> a = {fv(1, 1), fv(2, 2), fv(3, 3), fv(4, 4)};
    std::vector<FeatureVector> b = {fv(9, 9), fv(8, 8), fv(7, 7), fv(6, 6)};

    CHECK(knn_holdout_accuracy(a, b, 1, 0.75, 20, 42) ==
          knn_holdout_accuracy(a, b, 1, 0.75, 20, 42));

    CHECK_THROWS_AS(knn_holdout_accuracy({}, b, 1, 0.9, 10, 0), DomainError);
    CHECK_THROWS_AS(knn_holdout_accuracy(a, {}, 1, 0.9, 10, 0), DomainError);
    CHECK_THROWS_AS(knn_holdout_accuracy(a, b, 1, 0.0, 10, 0), DomainError);
    CHECK_THROWS_AS(knn_holdout_accuracy(a, b, 1, 1.0, 10, 0), DomainError);
    CHECK_THROWS_AS(knn_holdout_accuracy(a, b, 1, 0.9, 0, 0), DomainError);
    CHECK_THROWS_AS(knn_holdout_accuracy(a, b, 99, 0.9, 10, 0), DomainError);
}
