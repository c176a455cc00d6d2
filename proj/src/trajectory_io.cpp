#include "mobisynth/trajectory_io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "mobisynth/errors.hpp"

namespace mobisynth {
namespace {

// Inverse of days_from_civil (Howard Hinnant's civil_from_days).
CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    std::int64_t doe = z - era * 146097;
    std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    std::int64_t mp = (5 * doy + 2) / 153;
    std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

void append_f(std::string& out, const char* fmt, ...) {
    char buf[160];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    out += buf;
}

}  // namespace

std::string iso8601_utc(std::int64_t unix_s) {
    std::int64_t days = unix_s / 86400;
    std::int64_t sod = unix_s % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    CivilDate d = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month,
                  d.day, static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

std::string date_string(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string to_geojson(const Trajectory& t) {
    std::string out;
    out.reserve(64 * t.fixes.size() + 256);
    out += "{\n  \"type\": \"Feature\",\n  \"properties\": {\n";
    out += "    \"identity\": \"" + t.identity_ref + "\",\n";
    out += "    \"date\": \"" + date_string(t.day) + "\",\n";
    out += "    \"times\": [";
    for (std::size_t i = 0; i < t.fixes.size(); ++i) {
        out += i ? ",\n      " : "\n      ";
        append_f(out, "%" PRId64, t.fixes[i].t_unix_s);
    }
    out += t.fixes.empty() ? "]\n" : "\n    ]\n";
    out += "  },\n  \"geometry\": {\n    \"type\": \"LineString\",\n";
    out += "    \"coordinates\": [";
    for (std::size_t i = 0; i < t.fixes.size(); ++i) {
        out += i ? ",\n      " : "\n      ";
        append_f(out, "[%.7f, %.7f]", t.fixes[i].pos.lon, t.fixes[i].pos.lat);
    }
    out += t.fixes.empty() ? "]\n" : "\n    ]\n";
    out += "  }\n}\n";
    return out;
}

std::string to_gpx(const Trajectory& t) {
    std::string out;
    out.reserve(110 * t.fixes.size() + 256);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out +=
        "<gpx version=\"1.1\" creator=\"mobisynth\" "
        "xmlns=\"http://www.topografix.com/GPX/1/1\">\n";
    out += "  <trk>\n    <name>" + date_string(t.day) +
           (t.identity_ref.empty() ? "" : " " + t.identity_ref) + "</name>\n";
    out += "    <trkseg>\n";
    for (const Fix& f : t.fixes) {
        append_f(out, "      <trkpt lat=\"%.7f\" lon=\"%.7f\"><time>", f.pos.lat,
                 f.pos.lon);
        out += iso8601_utc(f.t_unix_s);
        out += "</time></trkpt>\n";
    }
    out += "    </trkseg>\n  </trk>\n</gpx>\n";
    return out;
}

std::string to_csv(const Trajectory& t) {
    std::string out;
    out.reserve(56 * t.fixes.size() + 64);
    out += "t_unix_s,lat,lon,speed_mps,accel_mps2\n";
    for (const Fix& f : t.fixes)
        append_f(out, "%" PRId64 ",%.7f,%.7f,%.5f,%.5f\n", f.t_unix_s, f.pos.lat,
                 f.pos.lon, f.speed_mps, f.accel_mps2);
    return out;
}

std::vector<Fix> parse_fix_csv(std::string_view text) {
    std::vector<Fix> fixes;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                           : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line_no == 1) {
            if (line != "t_unix_s,lat,lon,speed_mps,accel_mps2")
                throw ParseError("unrecognized fix CSV header", line_no);
            continue;
        }
        if (line.empty()) continue;

        std::string row(line);
        char* cur = row.data();
        char* end = nullptr;
        errno = 0;
        Fix f;
        f.t_unix_s = std::strtoll(cur, &end, 10);
        double* fields[4] = {&f.pos.lat, &f.pos.lon, &f.speed_mps, &f.accel_mps2};
        bool ok = end != cur && errno == 0;
        for (int i = 0; ok && i < 4; ++i) {
            if (*end != ',') {
                ok = false;
                break;
            }
            cur = end + 1;
            *fields[i] = std::strtod(cur, &end);
            ok = end != cur && errno == 0;
        }
        if (!ok || *end != '\0') throw ParseError("malformed fix row", line_no);
        validate(f.pos);
        if (!fixes.empty() && f.t_unix_s < fixes.back().t_unix_s)
            throw ParseError("timestamps decrease", line_no);
        fixes.push_back(f);
    }
    if (line_no == 0) throw ParseError("empty fix CSV", 1);
    return fixes;
}

}  // namespace mobisynth
