#include "mobisynth/geo.hpp"

#include <algorithm>
#include <cmath>

#include "mobisynth/errors.hpp"

namespace mobisynth {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

double sq(double x) { return x * x; }
}  // namespace

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
        throw DomainError("GeoPoint has non-finite coordinate");
    }
    if (p.lat < -90.0 || p.lat > 90.0) {
        throw DomainError("latitude out of [-90, 90]: " + std::to_string(p.lat));
    }
    if (p.lon < -180.0 || p.lon > 180.0) {
        throw DomainError("longitude out of [-180, 180]: " + std::to_string(p.lon));
    }
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
    double lat1 = a.lat * kDegToRad;
    double lat2 = b.lat * kDegToRad;
    double dlat = (b.lat - a.lat) * kDegToRad;
    double dlon = (b.lon - a.lon) * kDegToRad;
    double h = sq(std::sin(dlat / 2.0)) +
               std::cos(lat1) * std::cos(lat2) * sq(std::sin(dlon / 2.0));
    h = std::min(1.0, h);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double bearing_deg(const GeoPoint& a, const GeoPoint& b) {
    double lat1 = a.lat * kDegToRad;
    double lat2 = b.lat * kDegToRad;
    double dlon = (b.lon - a.lon) * kDegToRad;
    double y = std::sin(dlon) * std::cos(lat2);
    double x = std::cos(lat1) * std::sin(lat2) -
               std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
    double deg = std::atan2(y, x) / kDegToRad;
    return deg < 0.0 ? deg + 360.0 : deg;
}

double heading_change_deg(double bearing_a, double bearing_b) {
    double d = std::fmod(std::fabs(bearing_a - bearing_b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

GeoPoint offset_by_meters(const GeoPoint& p, double north_m, double east_m) {
    GeoPoint out;
    out.lat = p.lat + north_m / kMetersPerDegree;
    double scale = std::cos(p.lat * kDegToRad);
    if (std::fabs(scale) < 1e-12) scale = 1e-12;
    out.lon = p.lon + east_m / (kMetersPerDegree * scale);
    return out;
}

Polyline::Polyline(std::vector<GeoPoint> points) {
    for (const GeoPoint& p : points) append(p);
}

void Polyline::append(const GeoPoint& p) {
    validate(p);
    if (points_.empty()) {
        cumulative_m_.push_back(0.0);
    } else {
        cumulative_m_.push_back(cumulative_m_.back() + haversine_distance(points_.back(), p));
    }
    points_.push_back(p);
}

void Polyline::extend(const Polyline& other) {
    for (std::size_t i = 0; i < other.points_.size(); ++i) {
        if (!points_.empty() && i == 0 && points_.back() == other.points_[0]) continue;
        append(other.points_[i]);
    }
}

Polyline Polyline::reversed() const {
    Polyline out;
    for (auto it = points_.rbegin(); it != points_.rend(); ++it) out.append(*it);
    return out;
}

GeoPoint interpolate_along(const Polyline& p, double s) {
    if (p.empty()) throw DomainError("interpolate_along on empty polyline");
    double total = p.length_m();
    constexpr double kSlack = 1e-6;
    if (s < -kSlack || s > total + kSlack) {
        throw DomainError("arc length " + std::to_string(s) + " outside [0, " +
                          std::to_string(total) + "]");
    }
    s = std::clamp(s, 0.0, total);
    const auto& cum = p.cumulative_m();
    const auto& pts = p.points();
    // First vertex with cumulative >= s.
    auto it = std::lower_bound(cum.begin(), cum.end(), s);
    std::size_t hi = static_cast<std::size_t>(it - cum.begin());
    if (hi >= pts.size()) hi = pts.size() - 1;
    if (cum[hi] == s || hi == 0) return pts[hi];
    std::size_t lo = hi - 1;
    double seg = cum[hi] - cum[lo];
    if (seg <= 0.0) return pts[hi];
    double f = (s - cum[lo]) / seg;
    return GeoPoint{pts[lo].lat + f * (pts[hi].lat - pts[lo].lat),
                    pts[lo].lon + f * (pts[hi].lon - pts[lo].lon)};
}

}  // namespace mobisynth
