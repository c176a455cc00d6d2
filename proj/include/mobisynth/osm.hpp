#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mobisynth/geo.hpp"

namespace mobisynth {

enum class PoiKind {
    residential,
    work,
    school,
    gas_station,
    restaurant,
    cinema,
};

std::string_view to_string(PoiKind kind);
std::optional<PoiKind> poi_kind_from_string(std::string_view name);

struct Poi {
    std::int64_t id = 0;
    PoiKind kind = PoiKind::residential;
    GeoPoint location{0.0, 0.0};
};

struct RoadEdge {
    std::int64_t u = 0;
    std::int64_t v = 0;
    Polyline geometry;
    double length_m = 0.0;
    double speed_limit_mps = 0.0;
    double travel_time_s = 0.0;
};

// Undirected road network. Edges may be traversed in either direction;
// stop_nodes is a subset of the vertex ids.
struct RoadGraph {
    std::map<std::int64_t, GeoPoint> vertices;
    std::vector<RoadEdge> edges;
    std::set<std::int64_t> stop_nodes;
};

struct Extract {
    std::vector<Poi> pois;
    RoadGraph graph;
    std::vector<std::string> warnings;
};

// Maps a tag set onto the POI whitelist; nullopt when no rule matches.
std::optional<PoiKind> classify_poi(const std::map<std::string, std::string>& tags);

// Class fallback speed when no usable maxspeed tag is present.
double default_speed_mps(std::string_view highway_class);

// Accepts "NN" (km/h), "NN km/h" and "NN mph"; nullopt when unparseable.
std::optional<double> parse_maxspeed_mps(std::string_view value);

Extract parse_extract(std::string_view xml_text);

}  // namespace mobisynth
