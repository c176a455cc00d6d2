#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mobisynth/errors.hpp"
#include "mobisynth/pipeline.hpp"
#include "mobisynth/traffic.hpp"
#include "support/fixture_map.hpp"

using namespace mobisynth;
using testsupport::fixture_graph;
using testsupport::fixture_pois;
using testsupport::four_state_identity;
using testsupport::two_state_identity;

namespace {

// Oracle for the closed-form calendar: a month-length table walked one day
// at a time. 1960-01-01 is 3653 days before the epoch (ten years, three of
// them leap) and was a Friday.
int month_len(int y, int m) {
    static const int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
    return (m == 2 && leap) ? 29 : len[m - 1];
}

// Every structural invariant a synthesized day must satisfy.
void check_trajectory(const Trajectory& t, const DayConfig& cfg, std::int64_t epoch) {
    REQUIRE(!t.fixes.empty());
    REQUIRE(!t.segments.empty());
    for (std::size_t i = 1; i < t.fixes.size(); ++i) {
        REQUIRE(t.fixes[i].t_unix_s > t.fixes[i - 1].t_unix_s);
        REQUIRE(t.fixes[i].t_unix_s - t.fixes[i - 1].t_unix_s <= cfg.idle_period_s);
    }
    REQUIRE(t.segments.front().begin == 0);
    REQUIRE(t.segments.back().end == t.fixes.size());
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        const TrajectorySegment& seg = t.segments[i];
        REQUIRE(seg.begin < seg.end);
        if (i > 0) {
            REQUIRE(seg.begin == t.segments[i - 1].end);
            REQUIRE(seg.kind != t.segments[i - 1].kind);
        }
        if (seg.kind == SegmentKind::drive) {
            REQUIRE(t.fixes[seg.begin].speed_mps == 0.0);
            REQUIRE(t.fixes[seg.end - 1].speed_mps == 0.0);
        }
        if (seg.kind == SegmentKind::idle) {
            for (std::size_t j = seg.begin; j < seg.end; ++j) {
                REQUIRE(t.fixes[j].speed_mps == 0.0);
                REQUIRE(t.fixes[j].accel_mps2 == 0.0);
            }
        }
        if (seg.kind == SegmentKind::walk) {
            for (std::size_t j = seg.begin; j < seg.end; ++j)
                REQUIRE(t.fixes[j].speed_mps <= cfg.walk_speed_mps + 1e-12);
        }
    }
    REQUIRE(t.fixes.front().t_unix_s == epoch);
    REQUIRE(t.fixes.back().t_unix_s >= epoch + 86399);
}

std::vector<const TrajectorySegment*> segments_of(const Trajectory& t,
                                                  SegmentKind kind) {
    std::vector<const TrajectorySegment*> out;
    for (const auto& s : t.segments)
        if (s.kind == kind) out.push_back(&s);
    return out;
}

bool same_fixes(const std::vector<Fix>& a, const std::vector<Fix>& b) {
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

TEST_CASE("civil day numbers match an incremental calendar from 1960 to 2035") {
    REQUIRE(days_from_civil({1970, 1, 1}) == 0);
    REQUIRE(unix_from_civil({1970, 1, 1}) == 0);
    REQUIRE(days_from_civil({2023, 5, 15}) == 19492);
    REQUIRE(unix_from_civil({2023, 5, 15}) == 1684108800);

    std::int64_t expect = -3653;
    int dow = 5;
    for (int y = 1960; y <= 2035; ++y) {
        for (int m = 1; m <= 12; ++m) {
            for (int d = 1; d <= month_len(y, m); ++d) {
                CivilDate date{y, m, d};
                REQUIRE(days_from_civil(date) == expect);
                REQUIRE(day_of_week(date) == dow);
                REQUIRE(unix_from_civil(date) == expect * 86400);
                ++expect;
                dow = (dow + 1) % 7;
            }
        }
    }

    // century rule: 2000 is a leap year, 2100 is not
    REQUIRE(days_from_civil({2000, 3, 1}) - days_from_civil({2000, 2, 29}) == 1);
    REQUIRE(days_from_civil({2100, 3, 1}) - days_from_civil({2100, 2, 28}) == 1);

    CHECK_THROWS_AS(days_from_civil({2023, 0, 1}), DomainError);
    CHECK_THROWS_AS(days_from_civil({2023, 13, 1}), DomainError);
    CHECK_THROWS_AS(days_from_civil({2023, 5, 0}), DomainError);
    CHECK_THROWS_AS(days_from_civil({2023, 5, 32}), DomainError);
}

TEST_CASE("weekday flag and machine selection follow the day of week") {
    // 2023-05-15 was a Monday
    const char* expect = "MTWTFSS";
    for (int i = 0; i < 7; ++i) {
        CivilDate date{2023, 5, 15 + i};
        bool weekday = expect[i] != 'S';
        CHECK(is_weekday(date) == weekday);
    }
    CHECK(day_of_week({2023, 5, 21}) == 0);  // Sunday
    CHECK(day_of_week({2023, 5, 20}) == 6);  // Saturday

    UserModel user = build_user_model(fixture_pois(), default_identity_config(), 11);
    CHECK(&pick_machine(user, {2023, 5, 15}) == &user.weekday);
    CHECK(&pick_machine(user, {2023, 5, 19}) == &user.weekday);
    CHECK(&pick_machine(user, {2023, 5, 20}) == &user.weekend);
    CHECK(&pick_machine(user, {2023, 5, 21}) == &user.weekend);
}

TEST_CASE("home-work day builds idle / drive / idle / drive / idle") {
    Identity identity = two_state_identity();
    OfflineProvider provider(fixture_graph());
    DayConfig cfg;
    cfg.noise_sigma_m = 0.0;  // exact positions for structural checks
    CivilDate date{2023, 5, 15};
    std::int64_t epoch = unix_from_civil(date);

    Trajectory t = synthesize_day(identity, date, fixture_graph(), provider, cfg, 99);
    check_trajectory(t, cfg, epoch);
    CHECK(t.identity_ref == "weekday");
    CHECK(t.day.year == 2023);
    CHECK(t.day.month == 5);
    CHECK(t.day.day == 15);

    auto drives = segments_of(t, SegmentKind::drive);
    auto idles = segments_of(t, SegmentKind::idle);
    REQUIRE(drives.size() == 2);
    REQUIRE(idles.size() == 3);
    CHECK(t.segments.front().kind == SegmentKind::idle);
    CHECK(t.segments.back().kind == SegmentKind::idle);

    const GeoPoint& home = state_by_id(identity, 0).location;
    const GeoPoint& work = state_by_id(identity, 1).location;
    const GeoPoint anchors[3] = {home, work, home};
    for (int k = 0; k < 3; ++k)
        for (std::size_t j = idles[k]->begin; j < idles[k]->end; ++j)
            REQUIRE(t.fixes[j].pos == anchors[k]);

    // a workday: at work most of the day, home idle spans both day ends
    auto span_s = [&](const TrajectorySegment* s) {
        return t.fixes[s->end - 1].t_unix_s - t.fixes[s->begin].t_unix_s;
    };
    CHECK(span_s(idles[0]) >= 3600);
    CHECK(span_s(idles[1]) >= 6 * 3600);
    CHECK(t.fixes.back().t_unix_s == epoch + 86399);

    // drives start and end on graph vertices
    for (const auto* d : drives) {
        bool on_vertex = false;
        for (const auto& [id, p] : fixture_graph().vertices)
            if (p == t.fixes[d->begin].pos) on_vertex = true;
        CHECK(on_vertex);
    }

    // each drive is bracketed by walks between POI and vertex
    auto walks = segments_of(t, SegmentKind::walk);
    CHECK(walks.size() == 4);
}

TEST_CASE("one seed reproduces the day bit for bit, another changes it") {
    Identity identity = two_state_identity();
    OfflineProvider provider(fixture_graph());
    DayConfig cfg;
    CivilDate date{2023, 5, 16};

    Trajectory a = synthesize_day(identity, date, fixture_graph(), provider, cfg, 123);
    Trajectory b = synthesize_day(identity, date, fixture_graph(), provider, cfg, 123);
    REQUIRE(same_fixes(a.fixes, b.fixes));
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].kind == b.segments[i].kind);
        CHECK(a.segments[i].begin == b.segments[i].begin);
        CHECK(a.segments[i].end == b.segments[i].end);
    }
    CHECK(a.identity_ref == b.identity_ref);

    Trajectory c = synthesize_day(identity, date, fixture_graph(), provider, cfg, 124);
    CHECK(!same_fixes(a.fixes, c.fixes));
}

TEST_CASE("gps noise moves positions only") {
    Identity identity = two_state_identity();
    OfflineProvider provider(fixture_graph());
    CivilDate date{2023, 5, 17};
    DayConfig clean;
    clean.noise_sigma_m = 0.0;
    DayConfig noisy;
    noisy.noise_sigma_m = 3.0;

    Trajectory a = synthesize_day(identity, date, fixture_graph(), provider, clean, 5);
    Trajectory b = synthesize_day(identity, date, fixture_graph(), provider, noisy, 5);
    REQUIRE(a.fixes.size() == b.fixes.size());
    bool any_moved = false;
    for (std::size_t i = 0; i < a.fixes.size(); ++i) {
        REQUIRE(a.fixes[i].t_unix_s == b.fixes[i].t_unix_s);
        REQUIRE(a.fixes[i].speed_mps == b.fixes[i].speed_mps);
        REQUIRE(a.fixes[i].accel_mps2 == b.fixes[i].accel_mps2);
        if (a.fixes[i].pos != b.fixes[i].pos) any_moved = true;
    }
    CHECK(any_moved);
    REQUIRE(a.segments.size() == b.segments.size());
}

TEST_CASE("four-state days keep every invariant across seeds") {
    Identity identity = four_state_identity();
    REQUIRE(identity.states.size() == 4);
    OfflineProvider provider(fixture_graph());
    DayConfig cfg;
    CivilDate date{2023, 5, 18};
    std::int64_t epoch = unix_from_civil(date);

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Trajectory t =
            synthesize_day(identity, date, fixture_graph(), provider, cfg, seed);
        check_trajectory(t, cfg, epoch);
        CHECK(segments_of(t, SegmentKind::drive).size() >= 2);
    }
}

TEST_CASE("states sharing a vertex travel on foot") {
    Identity identity = two_state_identity();
    const GeoPoint v = fixture_graph().vertices.at(123);
    identity.states[0].location = offset_by_meters(v, 30.0, 20.0);
    identity.states[1].location = offset_by_meters(v, -25.0, -35.0);

    OfflineProvider provider(fixture_graph());
    DayConfig cfg;
    cfg.noise_sigma_m = 0.0;
    CivilDate date{2023, 5, 19};

    Trajectory t = synthesize_day(identity, date, fixture_graph(), provider, cfg, 7);
    check_trajectory(t, cfg, unix_from_civil(date));
    CHECK(segments_of(t, SegmentKind::drive).empty());
    CHECK(segments_of(t, SegmentKind::walk).size() == 2);
}

TEST_CASE("a leg that cannot be driven reports which leg failed") {
    Identity identity = two_state_identity();
    OfflineProvider provider(fixture_graph());
    DayConfig cfg;
    cfg.driving.objective_threshold_mps = 1e-15;  // unreachable objective
    cfg.driving.max_retries = 0;
    CivilDate date{2023, 5, 15};

    try {
        synthesize_day(identity, date, fixture_graph(), provider, cfg, 42);
        FAIL("expected SynthesisError");
    } catch (const SynthesisError& e) {
        std::string msg = e.what();
        CHECK(msg.find("leg 0") != std::string::npos);
        CHECK(msg.find("Home") != std::string::npos);
        CHECK(msg.find("Work") != std::string::npos);
        CHECK(e.best_residual() < 1e30);
    }
}

TEST_CASE("config and date errors are rejected up front") {
    Identity identity = two_state_identity();
    OfflineProvider provider(fixture_graph());
    const RoadGraph& g = fixture_graph();
    DayConfig cfg;

    DayConfig bad = cfg;
    bad.idle_period_s = 0;
    CHECK_THROWS_AS(synthesize_day(identity, {2023, 5, 15}, g, provider, bad, 1),
                    DomainError);
    bad = cfg;
    bad.walk_speed_mps = 0.0;
    CHECK_THROWS_AS(synthesize_day(identity, {2023, 5, 15}, g, provider, bad, 1),
                    DomainError);
    bad = cfg;
    bad.noise_sigma_m = -1.0;
    CHECK_THROWS_AS(synthesize_day(identity, {2023, 5, 15}, g, provider, bad, 1),
                    DomainError);
    CHECK_THROWS_AS(synthesize_day(identity, {2023, 13, 1}, g, provider, cfg, 1),
                    DomainError);
}
