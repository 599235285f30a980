#pragma once

#include <string>
#include <string_view>

namespace layerlab::utf8 {

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view bytes);

// Surrogates and out-of-range values encode as U+FFFD.
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_space(char32_t c);
bool is_ascii_alnum(char32_t c);
char32_t ascii_lower(char32_t c);

}  // namespace layerlab::utf8
