#pragma once

#include <cstdint>
#include <vector>

#include "mobisynth/geo.hpp"
#include "mobisynth/osm.hpp"

namespace mobisynth {

struct PathResult {
    std::vector<std::int64_t> vertex_ids;
    Polyline geometry;
    double total_time_s = 0.0;
    double total_length_m = 0.0;
};

// Vertex minimizing haversine distance to p; ties go to the smaller id.
std::int64_t nearest_vertex(const RoadGraph& graph, const GeoPoint& p);

// Dijkstra over edge travel times. Among equal-time paths the
// lexicographically smallest vertex-id sequence wins. Throws RoutingError
// when dst is unreachable.
PathResult fastest_path(const RoadGraph& graph, std::int64_t src, std::int64_t dst);

// Waypoints for traffic queries: endpoints, stop-sign vertices, and
// vertices turning more than the threshold; evenly subsampled down to
// max_waypoints keeping both endpoints.
std::vector<GeoPoint> split_waypoints(const PathResult& path, const RoadGraph& graph,
                                      std::size_t max_waypoints = 23,
                                      double turn_threshold_deg = 30.0);

}  // namespace mobisynth
