#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "mobisynth/geo.hpp"
#include "mobisynth/osm.hpp"

namespace mobisynth {

enum class TrafficModel { pessimistic, best_guess };

struct RouteStep {
    Polyline geometry;
    double d_step_m = 0.0;
    double t_step_s = 0.0;
};

struct TrafficQuery {
    std::vector<GeoPoint> waypoints;
    std::int64_t departure_unix_s = 0;
    TrafficModel model = TrafficModel::best_guess;
};

class TrafficProvider {
public:
    virtual ~TrafficProvider() = default;
    virtual std::vector<RouteStep> get_route(const TrafficQuery& q) = 0;
};

// Fixed rush-hour schedule by wall-clock departure time: 1.5 during
// 7:00-10:00, 1.4 during 16:00-19:00, 1.0 otherwise.
double congestion_factor(std::int64_t departure_unix_s);

// Deterministic stand-in for the remote API: routes between consecutive
// waypoints on the graph and emits one step per waypoint pair covering the
// traversed edge run, times scaled by the congestion schedule (pessimistic
// adds a further 1.2). Coincident waypoints contribute no step.
std::vector<RouteStep> offline_route(const RoadGraph& graph, const TrafficQuery& q);

class OfflineProvider : public TrafficProvider {
public:
    explicit OfflineProvider(const RoadGraph& graph) : graph_(graph) {}
    std::vector<RouteStep> get_route(const TrafficQuery& q) override {
        return offline_route(graph_, q);
    }

private:
    const RoadGraph& graph_;
};

// Token bucket with injectable time sources so tests can drive it with a
// manual clock. acquire() blocks through the sleep callback.
class RateLimiter {
public:
    RateLimiter(double requests_per_s, std::function<double()> now,
                std::function<void(double)> sleep);

    void acquire();
    bool try_acquire();

private:
    double rate_;
    double capacity_;
    double tokens_;
    double last_;
    std::function<double()> now_;
    std::function<void(double)> sleep_;
    std::mutex mutex_;
};

struct RemoteConfig {
    // Scheme-qualified base, e.g. "https://maps.example.com"; tests point it
    // at a loopback server.
    std::string base_url;
    std::string path = "/directions/json";
    std::string api_key_env = "MOBISYNTH_API_KEY";
    std::string cache_dir;  // empty disables the disk cache
    double requests_per_s = 1.0;
    // Departures must not precede this epoch.
    std::int64_t min_departure_unix_s = 0;
    double timeout_s = 10.0;
    std::function<double()> clock;       // seconds; defaults to steady_clock
    std::function<void(double)> sleep;   // defaults to thread sleep
};

// Directions-API client: rate-limited HTTP with a content-addressed disk
// cache keyed by the canonical query string. Throws ProviderError for
// transport, quota and empty-result failures.
class RemoteProvider : public TrafficProvider {
public:
    explicit RemoteProvider(RemoteConfig cfg);
    std::vector<RouteStep> get_route(const TrafficQuery& q) override;

    // Canonical wire form of a query; the cache key is its FNV-1a hash.
    static std::string canonical_query(const TrafficQuery& q);

private:
    std::vector<RouteStep> fetch(const TrafficQuery& q, const std::string& canonical);

    RemoteConfig cfg_;
    RateLimiter limiter_;
};

}  // namespace mobisynth
