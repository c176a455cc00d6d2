#include "mobisynth/osm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mobisynth/errors.hpp"
#include "xml_lite.hpp"

namespace mobisynth {

namespace {

struct RawNode {
    GeoPoint location;
    std::map<std::string, std::string> tags;
};

struct RawWay {
    std::int64_t id = 0;
    std::vector<std::int64_t> refs;
    std::map<std::string, std::string> tags;
    std::size_t line = 0;
};

std::optional<double> parse_number(std::string_view s) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) return std::nullopt;
    // Trailing garbage is the caller's problem; report how far we got.
    if (ptr != last) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

const std::string* find_tag(const std::map<std::string, std::string>& tags,
                            const std::string& key) {
    auto it = tags.find(key);
    return it == tags.end() ? nullptr : &it->second;
}

}  // namespace

std::string_view to_string(PoiKind kind) {
    switch (kind) {
        case PoiKind::residential: return "residential";
        case PoiKind::work: return "work";
        case PoiKind::school: return "school";
        case PoiKind::gas_station: return "gas_station";
        case PoiKind::restaurant: return "restaurant";
        case PoiKind::cinema: return "cinema";
    }
    return "unknown";
}

std::optional<PoiKind> poi_kind_from_string(std::string_view name) {
    if (name == "residential") return PoiKind::residential;
    if (name == "work") return PoiKind::work;
    if (name == "school") return PoiKind::school;
    if (name == "gas_station") return PoiKind::gas_station;
    if (name == "restaurant") return PoiKind::restaurant;
    if (name == "cinema") return PoiKind::cinema;
    return std::nullopt;
}

std::optional<PoiKind> classify_poi(const std::map<std::string, std::string>& tags) {
    if (const std::string* building = find_tag(tags, "building")) {
        if (*building == "apartments" || *building == "house" ||
            *building == "residential" || *building == "bungalow")
            return PoiKind::residential;
        if (*building == "commercial" || *building == "industrial")
            return PoiKind::work;
    }
    if (const std::string* amenity = find_tag(tags, "amenity")) {
        if (*amenity == "school") return PoiKind::school;
        if (*amenity == "fuel") return PoiKind::gas_station;
        if (*amenity == "restaurant" || *amenity == "cafe" || *amenity == "fast_food")
            return PoiKind::restaurant;
        if (*amenity == "cinema") return PoiKind::cinema;
    }
    return std::nullopt;
}

double default_speed_mps(std::string_view highway_class) {
    double kmh = 40.0;
    if (highway_class == "motorway") kmh = 100.0;
    else if (highway_class == "primary") kmh = 60.0;
    else if (highway_class == "secondary") kmh = 50.0;
    else if (highway_class == "residential") kmh = 40.0;
    else if (highway_class == "service") kmh = 20.0;
    return kmh / 3.6;
}

std::optional<double> parse_maxspeed_mps(std::string_view value) {
    std::string_view s = trim(value);
    if (s.empty()) return std::nullopt;

    bool mph = false;
    if (s.size() >= 3 && s.substr(s.size() - 3) == "mph") {
        mph = true;
        s = trim(s.substr(0, s.size() - 3));
    } else if (s.size() >= 4 && s.substr(s.size() - 4) == "km/h") {
        s = trim(s.substr(0, s.size() - 4));
    }
    std::optional<double> num = parse_number(s);
    if (!num || *num <= 0.0) return std::nullopt;
    return mph ? *num * 0.44704 : *num / 3.6;
}

Extract parse_extract(std::string_view xml_text) {
    xml::Parser parser(xml_text);
    std::map<std::int64_t, RawNode> nodes;
    std::vector<RawWay> ways;
    std::vector<std::int64_t> node_order;

    // Pull pass: collect nodes and ways; everything else is skipped. A small
    // stack of open element names decides where a <tag>/<nd> belongs.
    std::vector<std::string> stack;
    std::int64_t current_node = 0;
    RawWay* current_way = nullptr;
    xml::Element el;
    for (;;) {
        xml::Parser::Event ev = parser.next(el);
        if (ev == xml::Parser::Event::eof) break;
        if (ev == xml::Parser::Event::end) {
            if (el.name == "way") current_way = nullptr;
            if (el.name == "node") current_node = 0;
            if (!stack.empty()) stack.pop_back();
            continue;
        }

        const std::string& parent = stack.empty() ? std::string() : stack.back();
        if (el.name == "node" && parent == "osm") {
            const std::string* id = el.attr("id");
            const std::string* lat = el.attr("lat");
            const std::string* lon = el.attr("lon");
            if (!id || !lat || !lon)
                throw ParseError("node missing id/lat/lon", el.line);
            auto idv = parse_integer(*id);
            auto latv = parse_number(*lat);
            auto lonv = parse_number(*lon);
            if (!idv || !latv || !lonv)
                throw ParseError("node with unparseable id/lat/lon", el.line);
            GeoPoint p{*latv, *lonv};
            validate(p);
            nodes[*idv] = RawNode{p, {}};
            node_order.push_back(*idv);
            if (!el.self_closing) current_node = *idv;
        } else if (el.name == "way" && parent == "osm") {
            const std::string* id = el.attr("id");
            auto idv = id ? parse_integer(*id) : std::nullopt;
            if (!idv) throw ParseError("way missing or unparseable id", el.line);
            ways.push_back(RawWay{*idv, {}, {}, el.line});
            if (!el.self_closing) current_way = &ways.back();
        } else if (el.name == "nd" && current_way) {
            const std::string* ref = el.attr("ref");
            auto refv = ref ? parse_integer(*ref) : std::nullopt;
            if (!refv) throw ParseError("nd missing or unparseable ref", el.line);
            current_way->refs.push_back(*refv);
        } else if (el.name == "tag") {
            const std::string* k = el.attr("k");
            const std::string* v = el.attr("v");
            if (!k || !v) throw ParseError("tag missing k/v", el.line);
            if (current_way) current_way->tags[*k] = *v;
            else if (current_node != 0) nodes[current_node].tags[*k] = *v;
            // Tags on relations or the root are ignored.
        }
        if (!el.self_closing) stack.push_back(el.name);
    }

    Extract out;

    // Node POIs in document order.
    for (std::int64_t id : node_order) {
        const RawNode& n = nodes.at(id);
        if (auto kind = classify_poi(n.tags))
            out.pois.push_back(Poi{id, *kind, n.location});
    }

    // Way validation: a way referencing a missing node is dropped entirely.
    std::vector<const RawWay*> valid_ways;
    for (const RawWay& w : ways) {
        bool ok = true;
        for (std::int64_t ref : w.refs) {
            if (!nodes.count(ref)) {
                out.warnings.push_back("way " + std::to_string(w.id) +
                                       " references missing node " + std::to_string(ref) +
                                       "; way dropped");
                ok = false;
                break;
            }
        }
        if (ok) valid_ways.push_back(&w);
    }

    // Way POIs at the arithmetic centroid; a closed way's duplicated end
    // node counts once.
    for (const RawWay* w : valid_ways) {
        auto kind = classify_poi(w->tags);
        if (!kind || w->refs.empty()) continue;
        std::vector<std::int64_t> refs = w->refs;
        if (refs.size() > 1 && refs.front() == refs.back()) refs.pop_back();
        double lat = 0.0, lon = 0.0;
        for (std::int64_t ref : refs) {
            lat += nodes.at(ref).location.lat;
            lon += nodes.at(ref).location.lon;
        }
        double n = static_cast<double>(refs.size());
        out.pois.push_back(Poi{w->id, *kind, GeoPoint{lat / n, lon / n}});
    }

    // Road graph. Vertices sit at highway-way endpoints and at nodes shared
    // by two or more highway ways.
    std::vector<const RawWay*> highway_ways;
    for (const RawWay* w : valid_ways) {
        if (!find_tag(w->tags, "highway")) continue;
        if (w->refs.size() < 2) {
            out.warnings.push_back("highway way " + std::to_string(w->id) +
                                   " has fewer than 2 nodes; way dropped");
            continue;
        }
        highway_ways.push_back(w);
    }

    std::map<std::int64_t, int> way_use;
    for (const RawWay* w : highway_ways) {
        std::set<std::int64_t> seen;
        for (std::int64_t ref : w->refs)
            if (seen.insert(ref).second) ++way_use[ref];
    }
    std::set<std::int64_t> vertex_ids;
    for (const RawWay* w : highway_ways) {
        vertex_ids.insert(w->refs.front());
        vertex_ids.insert(w->refs.back());
    }
    for (const auto& [id, uses] : way_use)
        if (uses >= 2) vertex_ids.insert(id);

    for (std::int64_t id : vertex_ids)
        out.graph.vertices[id] = nodes.at(id).location;

    for (const RawWay* w : highway_ways) {
        const std::string* maxspeed = find_tag(w->tags, "maxspeed");
        double speed = 0.0;
        if (maxspeed) {
            if (auto parsed = parse_maxspeed_mps(*maxspeed)) {
                speed = *parsed;
            } else {
                out.warnings.push_back("way " + std::to_string(w->id) +
                                       " has unparseable maxspeed '" + *maxspeed +
                                       "'; class default used");
            }
        }
        if (speed <= 0.0) speed = default_speed_mps(*find_tag(w->tags, "highway"));

        // Split the way into edges at graph vertices; intermediate nodes
        // only shape the geometry.
        Polyline geom;
        std::int64_t edge_start = w->refs.front();
        geom.append(nodes.at(edge_start).location);
        for (std::size_t i = 1; i < w->refs.size(); ++i) {
            std::int64_t ref = w->refs[i];
            geom.append(nodes.at(ref).location);
            if (!vertex_ids.count(ref)) continue;
            if (geom.length_m() <= 0.0) {
                out.warnings.push_back("way " + std::to_string(w->id) +
                                       " yields a zero-length edge at node " +
                                       std::to_string(ref) + "; edge dropped");
            } else {
                RoadEdge e;
                e.u = edge_start;
                e.v = ref;
                e.geometry = geom;
                e.length_m = geom.length_m();
                e.speed_limit_mps = speed;
                e.travel_time_s = e.length_m / speed;
                out.graph.edges.push_back(std::move(e));
            }
            geom = Polyline();
            geom.append(nodes.at(ref).location);
            edge_start = ref;
        }
        if (geom.size() > 1) {
            // Trailing run not terminated by a vertex: impossible, since way
            // endpoints are always vertices.
            throw ContractError("way " + std::to_string(w->id) +
                                " ended between graph vertices");
        }
    }

    // Stop signs: nodes tagged highway=stop that are graph vertices. A stop
    // tag elsewhere on the network cannot anchor a waypoint and is reported.
    for (std::int64_t id : node_order) {
        const std::string* hw = find_tag(nodes.at(id).tags, "highway");
        if (!hw || *hw != "stop") continue;
        if (vertex_ids.count(id)) {
            out.graph.stop_nodes.insert(id);
        } else if (way_use.count(id)) {
            out.warnings.push_back("stop node " + std::to_string(id) +
                                   " is not a graph vertex; ignored");
        }
    }

    return out;
}

}  // namespace mobisynth
