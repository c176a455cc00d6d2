#include "mobisynth/snapshot.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mobisynth/errors.hpp"
#include "mobisynth/fs.hpp"

namespace mobisynth {

namespace {
using json = nlohmann::ordered_json;
constexpr int kSnapshotVersion = 1;
}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path + ": " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error("read failed on " + path);
    return std::move(buf).str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp + ": " + std::strerror(errno));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed on " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename " + tmp + " to " + path + ": " + std::strerror(errno));
}

std::string serialize_snapshot(const std::vector<Poi>& pois, const RoadGraph& graph) {
    json doc;
    doc["format"] = "mobisynth-snapshot";
    doc["version"] = kSnapshotVersion;

    json jpois = json::array();
    for (const Poi& p : pois) {
        jpois.push_back(json{{"id", p.id},
                             {"kind", to_string(p.kind)},
                             {"lat", p.location.lat},
                             {"lon", p.location.lon}});
    }
    doc["pois"] = std::move(jpois);

    json jverts = json::array();
    for (const auto& [id, loc] : graph.vertices)
        jverts.push_back(json{{"id", id}, {"lat", loc.lat}, {"lon", loc.lon}});

    json jedges = json::array();
    for (const RoadEdge& e : graph.edges) {
        json geom = json::array();
        for (const GeoPoint& p : e.geometry.points())
            geom.push_back(json::array({p.lat, p.lon}));
        jedges.push_back(json{{"u", e.u},
                              {"v", e.v},
                              {"speed_mps", e.speed_limit_mps},
                              {"geometry", std::move(geom)}});
    }

    doc["graph"] = json{{"vertices", std::move(jverts)},
                        {"edges", std::move(jedges)},
                        {"stop_nodes", graph.stop_nodes}};
    return doc.dump(1, '\t') + "\n";
}

Snapshot parse_snapshot(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("snapshot is not valid JSON: ") + e.what(), 0);
    }
    try {
        if (doc.at("format") != "mobisynth-snapshot")
            throw DomainError("not a snapshot file");
        if (doc.at("version") != kSnapshotVersion)
            throw DomainError("unsupported snapshot version " +
                              doc.at("version").dump());

        Snapshot snap;
        for (const json& jp : doc.at("pois")) {
            auto kind = poi_kind_from_string(jp.at("kind").get<std::string>());
            if (!kind)
                throw DomainError("unknown poi kind " + jp.at("kind").dump());
            snap.pois.push_back(Poi{jp.at("id").get<std::int64_t>(), *kind,
                                    GeoPoint{jp.at("lat").get<double>(),
                                             jp.at("lon").get<double>()}});
        }
        const json& jg = doc.at("graph");
        for (const json& jv : jg.at("vertices")) {
            snap.graph.vertices[jv.at("id").get<std::int64_t>()] =
                GeoPoint{jv.at("lat").get<double>(), jv.at("lon").get<double>()};
        }
        for (const json& je : jg.at("edges")) {
            RoadEdge e;
            e.u = je.at("u").get<std::int64_t>();
            e.v = je.at("v").get<std::int64_t>();
            e.speed_limit_mps = je.at("speed_mps").get<double>();
            for (const json& jp : je.at("geometry"))
                e.geometry.append(GeoPoint{jp.at(0).get<double>(), jp.at(1).get<double>()});
            if (e.speed_limit_mps <= 0.0)
                throw DomainError("edge with nonpositive speed");
            if (!snap.graph.vertices.count(e.u) || !snap.graph.vertices.count(e.v))
                throw DomainError("edge endpoint missing from vertices");
            e.length_m = e.geometry.length_m();
            if (e.length_m <= 0.0) throw DomainError("edge with zero length");
            e.travel_time_s = e.length_m / e.speed_limit_mps;
            snap.graph.edges.push_back(std::move(e));
        }
        for (const json& js : jg.at("stop_nodes")) {
            std::int64_t id = js.get<std::int64_t>();
            if (!snap.graph.vertices.count(id))
                throw DomainError("stop node " + std::to_string(id) +
                                  " missing from vertices");
            snap.graph.stop_nodes.insert(id);
        }
        return snap;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("snapshot structure invalid: ") + e.what(), 0);
    }
}

void save_snapshot(const std::string& path, const std::vector<Poi>& pois,
                   const RoadGraph& graph) {
    write_text_file(path, serialize_snapshot(pois, graph));
}

Snapshot load_snapshot(const std::string& path) {
    return parse_snapshot(read_text_file(path));
}

}  // namespace mobisynth
