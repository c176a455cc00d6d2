#include "mobisynth/polyline_codec.hpp"

#include <cmath>
#include <cstdint>

#include "mobisynth/errors.hpp"

namespace mobisynth {

namespace {

void encode_value(std::int64_t value, std::string& out) {
    std::uint64_t u = static_cast<std::uint64_t>(value) << 1;
    if (value < 0) u = ~u;
    while (u >= 0x20) {
        out.push_back(static_cast<char>((0x20 | (u & 0x1f)) + 63));
        u >>= 5;
    }
    out.push_back(static_cast<char>(u + 63));
}

std::int64_t decode_value(std::string_view s, std::size_t& pos) {
    std::uint64_t u = 0;
    int shift = 0;
    for (;;) {
        if (pos >= s.size())
            throw ParseError("encoded polyline truncated mid-value", 1, pos);
        int c = static_cast<unsigned char>(s[pos]) - 63;
        if (c < 0 || c > 63)
            throw ParseError("invalid encoded-polyline character", 1, pos);
        ++pos;
        u |= static_cast<std::uint64_t>(c & 0x1f) << shift;
        if ((c & 0x20) == 0) break;
        shift += 5;
        if (shift > 60)
            throw ParseError("encoded polyline value overflows", 1, pos);
    }
    bool negative = u & 1;
    std::int64_t v = static_cast<std::int64_t>(u >> 1);
    return negative ? ~v : v;
}

}  // namespace

std::string encode_polyline(const Polyline& line) {
    std::string out;
    std::int64_t prev_lat = 0, prev_lon = 0;
    for (const GeoPoint& p : line.points()) {
        std::int64_t lat = std::llround(p.lat * 1e5);
        std::int64_t lon = std::llround(p.lon * 1e5);
        encode_value(lat - prev_lat, out);
        encode_value(lon - prev_lon, out);
        prev_lat = lat;
        prev_lon = lon;
    }
    return out;
}

Polyline decode_polyline(std::string_view encoded) {
    Polyline out;
    std::size_t pos = 0;
    std::int64_t lat = 0, lon = 0;
    while (pos < encoded.size()) {
        lat += decode_value(encoded, pos);
        lon += decode_value(encoded, pos);
        out.append(GeoPoint{static_cast<double>(lat) * 1e-5,
                            static_cast<double>(lon) * 1e-5});
    }
    return out;
}

}  // namespace mobisynth
