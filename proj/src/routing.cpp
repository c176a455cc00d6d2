#include "mobisynth/routing.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>

#include "mobisynth/errors.hpp"

namespace mobisynth {

namespace {

struct Arc {
    std::int64_t to;
    std::size_t edge;
    bool forward;  // traverses the edge geometry u -> v
};

std::map<std::int64_t, std::vector<Arc>> build_adjacency(const RoadGraph& g) {
    std::map<std::int64_t, std::vector<Arc>> adj;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const RoadEdge& e = g.edges[i];
        adj[e.u].push_back(Arc{e.v, i, true});
        adj[e.v].push_back(Arc{e.u, i, false});
    }
    return adj;
}

}  // namespace

std::int64_t nearest_vertex(const RoadGraph& graph, const GeoPoint& p) {
    if (graph.vertices.empty()) throw DomainError("graph has no vertices");
    std::int64_t best = graph.vertices.begin()->first;
    double best_d = haversine_distance(graph.vertices.begin()->second, p);
    for (const auto& [id, loc] : graph.vertices) {
        double d = haversine_distance(loc, p);
        if (d < best_d) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

PathResult fastest_path(const RoadGraph& graph, std::int64_t src, std::int64_t dst) {
    if (!graph.vertices.count(src) || !graph.vertices.count(dst))
        throw DomainError("route endpoint is not a graph vertex");

    PathResult out;
    if (src == dst) {
        out.vertex_ids = {src};
        out.geometry.append(graph.vertices.at(src));
        return out;
    }

    auto adj = build_adjacency(graph);

    std::map<std::int64_t, double> dist;
    std::map<std::int64_t, std::int64_t> pred;
    std::map<std::int64_t, std::size_t> pred_edge;
    std::map<std::int64_t, bool> settled;

    auto path_to = [&](std::int64_t v) {
        std::vector<std::int64_t> path;
        for (std::int64_t cur = v;; cur = pred.at(cur)) {
            path.push_back(cur);
            if (cur == src) break;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };

    using HeapItem = std::pair<double, std::int64_t>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.push({0.0, src});

    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (settled.count(u)) continue;
        settled[u] = true;
        if (u == dst) break;
        for (const Arc& arc : adj[u]) {
            double nd = d + graph.edges[arc.edge].travel_time_s;
            auto it = dist.find(arc.to);
            if (it == dist.end() || nd < it->second) {
                dist[arc.to] = nd;
                pred[arc.to] = u;
                pred_edge[arc.to] = arc.edge;
                heap.push({nd, arc.to});
            } else if (nd == it->second && !settled.count(arc.to)) {
                // Equal time: keep the lexicographically smaller full path.
                std::vector<std::int64_t> cand = path_to(u);
                cand.push_back(arc.to);
                std::vector<std::int64_t> cur = path_to(pred.at(arc.to));
                cur.push_back(arc.to);
                if (std::lexicographical_compare(cand.begin(), cand.end(),
                                                 cur.begin(), cur.end())) {
                    pred[arc.to] = u;
                    pred_edge[arc.to] = arc.edge;
                }
            }
        }
    }

    if (!settled.count(dst))
        throw RoutingError("no route from " + std::to_string(src) + " to " +
                           std::to_string(dst));

    out.vertex_ids = path_to(dst);
    out.total_time_s = dist[dst];
    for (std::size_t i = 1; i < out.vertex_ids.size(); ++i) {
        std::int64_t v = out.vertex_ids[i];
        const RoadEdge& e = graph.edges[pred_edge.at(v)];
        out.total_length_m += e.length_m;
        Polyline leg = e.u == out.vertex_ids[i - 1] ? e.geometry : e.geometry.reversed();
        if (i == 1) out.geometry = leg;
        else out.geometry.extend(leg);
    }
    return out;
}

std::vector<GeoPoint> split_waypoints(const PathResult& path, const RoadGraph& graph,
                                      std::size_t max_waypoints,
                                      double turn_threshold_deg) {
    const auto& ids = path.vertex_ids;
    if (ids.size() < 2) throw DomainError("waypoint split needs a path of 2+ vertices");
    if (max_waypoints < 2) throw DomainError("max_waypoints must allow both endpoints");

    auto loc = [&](std::size_t i) { return graph.vertices.at(ids[i]); };

    std::vector<std::size_t> triggers;
    triggers.push_back(0);
    for (std::size_t i = 1; i + 1 < ids.size(); ++i) {
        bool stop = graph.stop_nodes.count(ids[i]) > 0;
        double incoming = bearing_deg(loc(i - 1), loc(i));
        double outgoing = bearing_deg(loc(i), loc(i + 1));
        bool turn = heading_change_deg(incoming, outgoing) > turn_threshold_deg;
        if (stop || turn) triggers.push_back(i);
    }
    triggers.push_back(ids.size() - 1);

    std::vector<std::size_t> kept;
    if (triggers.size() <= max_waypoints) {
        kept = triggers;
    } else {
        // Even subsample of the interior, endpoints pinned.
        kept.push_back(triggers.front());
        std::size_t interior = triggers.size() - 2;
        std::size_t need = max_waypoints - 2;
        for (std::size_t i = 0; i < need; ++i)
            kept.push_back(triggers[1 + i * interior / need]);
        kept.push_back(triggers.back());
    }

    std::vector<GeoPoint> out;
    out.reserve(kept.size());
    for (std::size_t i : kept) out.push_back(loc(i));
    return out;
}

}  // namespace mobisynth
