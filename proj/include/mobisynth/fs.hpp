#pragma once

#include <string>
#include <string_view>

namespace mobisynth {

// Reads an entire file; throws Error with the path on failure.
std::string read_text_file(const std::string& path);

// Writes atomically via a sibling temp file then rename.
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mobisynth
