#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers backed by ICU. Everything here works on code points; the
// toolkit never reasons about grapheme clusters.
namespace geezmt::unicode {

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view text);

bool is_valid_utf8(std::string_view text);

// Decodes to code points. Throws DecodeError on malformed input.
std::u32string to_u32(std::string_view text);
std::string to_utf8(std::u32string_view text);
std::string to_utf8(char32_t cp);

std::string nfc(std::string_view text);
bool is_nfc(std::string_view text);

// General categories Pc, Pd, Ps, Pe, Pi, Pf, Po. Covers the Ethiopic
// marks U+1360..U+1368.
bool is_punctuation(char32_t cp);
// Unicode White_Space property.
bool is_whitespace(char32_t cp);
// Simple (1:1) lowercase mapping.
char32_t to_lower(char32_t cp);

// Strips leading/trailing White_Space code points.
std::string trim(std::string_view text);

// Splits on runs of White_Space; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

std::size_t code_point_count(std::string_view text);

}  // namespace geezmt::unicode
