#ifndef MOBISYNTH_GEO_HPP
#define MOBISYNTH_GEO_HPP

#include <vector>

namespace mobisynth {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kMetersPerDegree = 111194.92664455873;  // earth radius * pi / 180

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]

    bool operator==(const GeoPoint& o) const { return lat == o.lat && lon == o.lon; }
    bool operator!=(const GeoPoint& o) const { return !(*this == o); }
};

// Throws DomainError if either coordinate is non-finite or out of bounds.
void validate(const GeoPoint& p);

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Initial bearing from a to b, degrees in [0, 360).
double bearing_deg(const GeoPoint& a, const GeoPoint& b);

// Smallest absolute difference between two bearings, degrees in [0, 180].
double heading_change_deg(double bearing_a, double bearing_b);

// Displace a point by metric offsets (north, east). Small-offset planar
// approximation; adequate at obfuscation-grid scale.
GeoPoint offset_by_meters(const GeoPoint& p, double north_m, double east_m);

// Ordered point sequence with per-point cumulative arc length in meters.
class Polyline {
  public:
    Polyline() = default;
    explicit Polyline(std::vector<GeoPoint> points);

    const std::vector<GeoPoint>& points() const { return points_; }
    const std::vector<double>& cumulative_m() const { return cumulative_m_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    double length_m() const { return cumulative_m_.empty() ? 0.0 : cumulative_m_.back(); }
    const GeoPoint& front() const { return points_.front(); }
    const GeoPoint& back() const { return points_.back(); }

    void append(const GeoPoint& p);

    // Concatenate another polyline; a duplicated shared joint point is merged.
    void extend(const Polyline& other);

    Polyline reversed() const;

  private:
    std::vector<GeoPoint> points_;
    std::vector<double> cumulative_m_;
};

// Point at arc length s along p (linear interpolation between vertices).
// Throws DomainError when s is outside [0, length] beyond a small tolerance.
GeoPoint interpolate_along(const Polyline& p, double s);

}  // namespace mobisynth

#endif
