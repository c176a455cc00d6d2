#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mobisynth/osm.hpp"

namespace mobisynth {

struct Snapshot {
    std::vector<Poi> pois;
    RoadGraph graph;
};

// Versioned JSON document; serialization is deterministic so identical
// inputs produce identical bytes. Edge lengths and travel times are
// recomputed on load from geometry and speed.
std::string serialize_snapshot(const std::vector<Poi>& pois, const RoadGraph& graph);
Snapshot parse_snapshot(std::string_view text);

void save_snapshot(const std::string& path, const std::vector<Poi>& pois,
                   const RoadGraph& graph);
Snapshot load_snapshot(const std::string& path);

}  // namespace mobisynth
