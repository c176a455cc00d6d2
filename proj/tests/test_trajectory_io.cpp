#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mobisynth/errors.hpp"
#include "mobisynth/pipeline.hpp"
#include "mobisynth/rng.hpp"
#include "mobisynth/trajectory_io.hpp"

using namespace mobisynth;

namespace {

Trajectory sample_trajectory(int n, std::uint64_t seed) {
    Rng rng(seed);
    Trajectory t;
    t.day = {2023, 5, 15};
    t.identity_ref = "weekday";
    std::int64_t ts = unix_from_civil(t.day);
    GeoPoint p{52.40, 13.20};
    for (int i = 0; i < n; ++i) {
        Fix f;
        f.t_unix_s = ts;
        f.pos = p;
        // keep values on the serializer's printable lattice so round-trips
        // can be compared exactly
        f.speed_mps = static_cast<double>(rng.index(500)) / 32.0;
        f.accel_mps2 = (static_cast<double>(rng.index(400)) - 200.0) / 32.0;
        t.fixes.push_back(f);
        ts += 1 + static_cast<std::int64_t>(rng.index(60));
        p = offset_by_meters(p, rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
    }
    return t;
}

}  // namespace

TEST_CASE("epoch seconds render as zero-padded ISO-8601") {
    CHECK(iso8601_utc(0) == "1970-01-01T00:00:00Z");
    CHECK(iso8601_utc(1684108800) == "2023-05-15T00:00:00Z");
    CHECK(iso8601_utc(1684194239) == "2023-05-15T23:43:59Z");
    CHECK(iso8601_utc(951827696) == "2000-02-29T12:34:56Z");
    CHECK(iso8601_utc(-1) == "1969-12-31T23:59:59Z");
    CHECK(iso8601_utc(-86400) == "1969-12-31T00:00:00Z");
}

TEST_CASE("iso8601 agrees with the forward calendar over a long sweep") {
    // walk four years of day boundaries plus an odd intra-day offset;
    // days_from_civil is the independently tested forward map
    for (std::int64_t day = -400; day <= 1200; ++day) {
        std::int64_t t = day * 86400 + 3723;  // 01:02:03
        std::string s = iso8601_utc(t);
        CivilDate d{std::stoi(s.substr(0, 4)), std::stoi(s.substr(5, 2)),
                    std::stoi(s.substr(8, 2))};
        CHECK(days_from_civil(d) == day);
        CHECK(s.substr(10) == "T01:02:03Z");
    }
}

TEST_CASE("date_string pads") {
    CHECK(date_string({2023, 5, 15}) == "2023-05-15");
    CHECK(date_string({800, 1, 2}) == "0800-01-02");
}

TEST_CASE("geojson is a LineString feature with aligned times") {
    Trajectory t = sample_trajectory(40, 11);
    auto doc = nlohmann::json::parse(to_geojson(t));

    CHECK(doc["type"] == "Feature");
    CHECK(doc["geometry"]["type"] == "LineString");
    CHECK(doc["properties"]["identity"] == "weekday");
    CHECK(doc["properties"]["date"] == "2023-05-15");

    const auto& coords = doc["geometry"]["coordinates"];
    const auto& times = doc["properties"]["times"];
    REQUIRE(coords.size() == t.fixes.size());
    REQUIRE(times.size() == t.fixes.size());
    for (std::size_t i = 0; i < t.fixes.size(); ++i) {
        CHECK(times[i].get<std::int64_t>() == t.fixes[i].t_unix_s);
        // GeoJSON position order is [lon, lat]; 7 decimals quantize to 5e-8
        CHECK(std::fabs(coords[i][0].get<double>() - t.fixes[i].pos.lon) <= 5e-8);
        CHECK(std::fabs(coords[i][1].get<double>() - t.fixes[i].pos.lat) <= 5e-8);
    }

    // empty trajectory still parses
    Trajectory empty;
    auto edoc = nlohmann::json::parse(to_geojson(empty));
    CHECK(edoc["geometry"]["coordinates"].empty());
    CHECK(edoc["properties"]["times"].empty());
}

TEST_CASE("gpx carries one timestamped trkpt per fix") {
    Trajectory t = sample_trajectory(25, 12);
    std::string gpx = to_gpx(t);

    CHECK(gpx.find("<?xml version=\"1.0\" encoding=\"UTF-8\"?>") == 0);
    CHECK(gpx.find("xmlns=\"http://www.topografix.com/GPX/1/1\"") != std::string::npos);
    CHECK(gpx.find("<name>2023-05-15 weekday</name>") != std::string::npos);

    std::size_t count = 0;
    for (std::size_t at = gpx.find("<trkpt"); at != std::string::npos;
         at = gpx.find("<trkpt", at + 1))
        ++count;
    CHECK(count == t.fixes.size());

    // first point spelled out end to end
    char expect[160];
    std::snprintf(expect, sizeof(expect),
                  "<trkpt lat=\"%.7f\" lon=\"%.7f\"><time>%s</time></trkpt>",
                  t.fixes[0].pos.lat, t.fixes[0].pos.lon,
                  iso8601_utc(t.fixes[0].t_unix_s).c_str());
    CHECK(gpx.find(expect) != std::string::npos);
}

TEST_CASE("csv round-trips fixes exactly") {
    Trajectory t = sample_trajectory(120, 13);
    std::string csv = to_csv(t);
    CHECK(csv.rfind("t_unix_s,lat,lon,speed_mps,accel_mps2\n", 0) == 0);

    std::vector<Fix> back = parse_fix_csv(csv);
    REQUIRE(back.size() == t.fixes.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].t_unix_s == t.fixes[i].t_unix_s);
        CHECK(back[i].speed_mps == t.fixes[i].speed_mps);
        CHECK(back[i].accel_mps2 == t.fixes[i].accel_mps2);
        CHECK(std::fabs(back[i].pos.lat - t.fixes[i].pos.lat) <= 5e-8);
        CHECK(std::fabs(back[i].pos.lon - t.fixes[i].pos.lon) <= 5e-8);
    }
}

TEST_CASE("serialization is a pure function of the trajectory") {
    Trajectory t = sample_trajectory(60, 14);
    CHECK(to_geojson(t) == to_geojson(t));
    CHECK(to_gpx(t) == to_gpx(t));
    CHECK(to_csv(t) == to_csv(t));

    Trajectory u = sample_trajectory(60, 15);
    CHECK(to_csv(t) != to_csv(u));
}

TEST_CASE("csv parser rejects damaged input with the offending line") {
    CHECK_THROWS_AS(parse_fix_csv("lat,lon\n"), ParseError);
    CHECK_THROWS_AS(parse_fix_csv(""), std::exception);  // header missing entirely

    std::string good = "t_unix_s,lat,lon,speed_mps,accel_mps2\n";
    CHECK(parse_fix_csv(good).empty());

    // windows line endings are tolerated
    std::vector<Fix> f =
        parse_fix_csv("t_unix_s,lat,lon,speed_mps,accel_mps2\r\n10,52.0,13.0,1.5,0.25\r\n");
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_unix_s == 10);
    CHECK(f[0].speed_mps == 1.5);

    auto line_of = [](const std::string& text) {
        try {
            parse_fix_csv(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of(good + "10,52.0,13.0,1.5\n") == 2);            // missing column
    CHECK(line_of(good + "10,52.0,13.0,1.5,0.25,9\n") == 2);     // extra column
    CHECK(line_of(good + "10,52.0,13.0,1.5,0.25\nx,1,2,3,4\n") == 3);
    CHECK(line_of(good + "10,52.0,13.0,1.5,0.25\n5,52.0,13.0,1.5,0.25\n") == 3);
    CHECK_THROWS_AS(parse_fix_csv(good + "10,952.0,13.0,1.5,0.25\n"), DomainError);
}
