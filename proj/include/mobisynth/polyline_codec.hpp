#pragma once

#include <string>
#include <string_view>

#include "mobisynth/geo.hpp"

namespace mobisynth {

// Encoded-polyline format used by directions APIs: 1e-5 degree precision,
// zigzag-coded deltas in 5-bit groups offset by 63.
std::string encode_polyline(const Polyline& line);

// Throws ParseError with the byte offset (as column) on truncated or
// malformed input. Empty input decodes to an empty polyline.
Polyline decode_polyline(std::string_view encoded);

}  // namespace mobisynth
