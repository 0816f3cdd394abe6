#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace alignforge {

// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD,
// one replacement per bad byte, so decoding is total and deterministic.
std::vector<char32_t> utf8_codepoints(std::string_view s);

// Encodes a single codepoint back to UTF-8.
std::string utf8_encode(char32_t cp);

// CJK unified ideographs (incl. extension A and compatibility block).
bool is_cjk(char32_t cp);

// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

// Deterministic language bucket for an instruction:
// CJK codepoint fraction > 0.3 -> "zh"; no CJK and at least one ASCII
// alphanumeric -> "en"; everything else -> "other".
std::string detect_lang(std::string_view instruction);

} // namespace alignforge
