#include "mobisynth/traffic.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mobisynth/errors.hpp"
#include "mobisynth/fs.hpp"
#include "mobisynth/polyline_codec.hpp"
#include "mobisynth/routing.hpp"

namespace mobisynth {

namespace {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.7f", v);
    return buf;
}

void validate_query(const TrafficQuery& q) {
    if (q.waypoints.size() < 2)
        throw DomainError("traffic query needs at least 2 waypoints");
    for (const GeoPoint& p : q.waypoints) validate(p);
}

std::string serialize_steps(const std::vector<RouteStep>& steps,
                            const std::string& canonical) {
    json doc;
    doc["format"] = "mobisynth-route-cache";
    doc["version"] = 1;
    doc["query"] = canonical;
    json jsteps = json::array();
    for (const RouteStep& s : steps) {
        jsteps.push_back(json{{"polyline", encode_polyline(s.geometry)},
                              {"d_step_m", s.d_step_m},
                              {"t_step_s", s.t_step_s}});
    }
    doc["steps"] = std::move(jsteps);
    return doc.dump() + "\n";
}

std::vector<RouteStep> parse_cached_steps(const std::string& text,
                                          const std::string& canonical) {
    json doc = json::parse(text);
    if (doc.at("format") != "mobisynth-route-cache" || doc.at("version") != 1 ||
        doc.at("query") != canonical)
        throw DomainError("cache entry does not match the query");
    std::vector<RouteStep> steps;
    for (const json& js : doc.at("steps")) {
        RouteStep s;
        s.geometry = decode_polyline(js.at("polyline").get<std::string>());
        s.d_step_m = js.at("d_step_m").get<double>();
        s.t_step_s = js.at("t_step_s").get<double>();
        steps.push_back(std::move(s));
    }
    return steps;
}

}  // namespace

double congestion_factor(std::int64_t departure_unix_s) {
    std::int64_t clock = ((departure_unix_s % 86400) + 86400) % 86400;
    if (clock >= 25200 && clock < 36000) return 1.5;  // 7:00-10:00
    if (clock >= 57600 && clock < 68400) return 1.4;  // 16:00-19:00
    return 1.0;
}

std::vector<RouteStep> offline_route(const RoadGraph& graph, const TrafficQuery& q) {
    validate_query(q);
    double factor = congestion_factor(q.departure_unix_s);
    if (q.model == TrafficModel::pessimistic) factor *= 1.2;

    std::vector<RouteStep> steps;
    for (std::size_t w = 0; w + 1 < q.waypoints.size(); ++w) {
        std::int64_t src = nearest_vertex(graph, q.waypoints[w]);
        std::int64_t dst = nearest_vertex(graph, q.waypoints[w + 1]);
        if (src == dst) continue;  // coincident waypoints span no edges
        PathResult path = fastest_path(graph, src, dst);
        RouteStep s;
        double d_sum = 0.0;
        double t_free = 0.0;
        for (std::size_t i = 1; i < path.vertex_ids.size(); ++i) {
            // Recover the traversed edge; fastest_path already validated it.
            std::int64_t a = path.vertex_ids[i - 1];
            std::int64_t b = path.vertex_ids[i];
            const RoadEdge* edge = nullptr;
            double best = 0.0;
            for (const RoadEdge& e : graph.edges) {
                if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) {
                    if (!edge || e.travel_time_s < best) {
                        edge = &e;
                        best = e.travel_time_s;
                    }
                }
            }
            if (!edge) throw ContractError("path edge missing from graph");
            Polyline geom =
                edge->u == a ? edge->geometry : edge->geometry.reversed();
            if (i == 1)
                s.geometry = std::move(geom);
            else
                s.geometry.extend(geom);
            d_sum += edge->length_m;
            t_free += edge->travel_time_s;
        }
        s.d_step_m = d_sum;
        s.t_step_s = t_free * factor;
        steps.push_back(std::move(s));
    }
    return steps;
}

RateLimiter::RateLimiter(double requests_per_s, std::function<double()> now,
                         std::function<void(double)> sleep)
    : rate_(requests_per_s),
      capacity_(requests_per_s < 1.0 ? 1.0 : requests_per_s),
      now_(std::move(now)),
      sleep_(std::move(sleep)) {
    if (rate_ <= 0.0) throw DomainError("rate limit must be positive");
    tokens_ = capacity_;
    last_ = now_();
}

bool RateLimiter::try_acquire() {
    std::lock_guard<std::mutex> lock(mutex_);
    double t = now_();
    tokens_ = std::min(capacity_, tokens_ + (t - last_) * rate_);
    last_ = t;
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return true;
    }
    return false;
}

void RateLimiter::acquire() {
    while (!try_acquire()) sleep_(1.0 / rate_);
}

RemoteProvider::RemoteProvider(RemoteConfig cfg)
    : cfg_(std::move(cfg)),
      limiter_(cfg_.requests_per_s,
               cfg_.clock ? cfg_.clock
                          : [] {
                                return std::chrono::duration<double>(
                                           std::chrono::steady_clock::now()
                                               .time_since_epoch())
                                    .count();
                            },
               cfg_.sleep ? cfg_.sleep : [](double s) {
                   std::this_thread::sleep_for(std::chrono::duration<double>(s));
               }) {
    if (cfg_.base_url.empty())
        throw DomainError("remote provider needs a base URL");
}

std::string RemoteProvider::canonical_query(const TrafficQuery& q) {
    std::string s = "origin=" + format_coord(q.waypoints.front().lat) + "," +
                    format_coord(q.waypoints.front().lon);
    s += "&destination=" + format_coord(q.waypoints.back().lat) + "," +
         format_coord(q.waypoints.back().lon);
    if (q.waypoints.size() > 2) {
        s += "&waypoints=";
        for (std::size_t i = 1; i + 1 < q.waypoints.size(); ++i) {
            if (i > 1) s += "|";
            s += format_coord(q.waypoints[i].lat) + "," +
                 format_coord(q.waypoints[i].lon);
        }
    }
    s += "&departure_time=" + std::to_string(q.departure_unix_s);
    s += "&traffic_model=";
    s += q.model == TrafficModel::pessimistic ? "pessimistic" : "best_guess";
    return s;
}

std::vector<RouteStep> RemoteProvider::get_route(const TrafficQuery& q) {
    validate_query(q);
    if (q.departure_unix_s < cfg_.min_departure_unix_s)
        throw DomainError("departure precedes the provider epoch");

    std::string canonical = canonical_query(q);
    std::filesystem::path cache_file;
    if (!cfg_.cache_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof name, "%016llx.json",
                      static_cast<unsigned long long>(fnv1a(canonical)));
        cache_file = std::filesystem::path(cfg_.cache_dir) / name;
        if (std::filesystem::exists(cache_file))
            return parse_cached_steps(read_text_file(cache_file.string()), canonical);
    }

    std::vector<RouteStep> steps = fetch(q, canonical);

    if (!cache_file.empty()) {
        std::filesystem::create_directories(cache_file.parent_path());
        write_text_file(cache_file.string(), serialize_steps(steps, canonical));
    }
    return steps;
}

std::vector<RouteStep> RemoteProvider::fetch(const TrafficQuery& q,
                                             const std::string& canonical) {
    limiter_.acquire();

    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));

    std::string url = cfg_.path + "?" + canonical;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        url += std::string("&key=") + key;

    httplib::Result res = client.Get(url);
    if (!res)
        throw ProviderError(ProviderError::Kind::transport,
                            "request failed: " + httplib::to_string(res.error()));
    if (res->status == 429) {
        double retry = 0.0;
        if (res->has_header("Retry-After"))
            retry = std::atof(res->get_header_value("Retry-After").c_str());
        throw ProviderError(ProviderError::Kind::quota, "rate limited by server", retry);
    }
    if (res->status != 200)
        throw ProviderError(ProviderError::Kind::transport,
                            "HTTP status " + std::to_string(res->status));

    json doc;
    try {
        doc = json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(ProviderError::Kind::bad_response,
                            std::string("response is not JSON: ") + e.what());
    }

    try {
        std::string status = doc.at("status").get<std::string>();
        if (status == "ZERO_RESULTS")
            throw ProviderError(ProviderError::Kind::zero_results,
                                "no route between the waypoints");
        if (status == "OVER_QUERY_LIMIT" || status == "OVER_DAILY_LIMIT" ||
            status == "REQUEST_DENIED") {
            double retry = 0.0;
            if (res->has_header("Retry-After"))
                retry = std::atof(res->get_header_value("Retry-After").c_str());
            throw ProviderError(ProviderError::Kind::quota, "status " + status, retry);
        }
        if (status != "OK")
            throw ProviderError(ProviderError::Kind::bad_response, "status " + status);

        std::vector<RouteStep> steps;
        for (const json& route : doc.at("routes")) {
            for (const json& leg : route.at("legs")) {
                for (const json& js : leg.at("steps")) {
                    RouteStep s;
                    s.geometry =
                        decode_polyline(js.at("polyline").at("points").get<std::string>());
                    s.d_step_m = js.at("distance").at("value").get<double>();
                    s.t_step_s = js.at("duration").at("value").get<double>();
                    if (s.d_step_m <= 0.0 || s.t_step_s <= 0.0)
                        throw ProviderError(ProviderError::Kind::bad_response,
                                            "step with nonpositive distance or time");
                    steps.push_back(std::move(s));
                }
            }
            break;  // first route only
        }
        if (steps.empty())
            throw ProviderError(ProviderError::Kind::zero_results,
                                "response carries no steps");
        return steps;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(ProviderError::Kind::bad_response,
                            std::string("response structure invalid: ") + e.what());
    }
}

}  // namespace mobisynth
