#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace autodp::text {

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

bool is_cjk(char32_t c);
bool is_letter(char32_t c);
bool is_digit(char32_t c);
bool is_whitespace(char32_t c);

/// Whitespace split, with every CJK codepoint emitted as its own token.
std::vector<std::string> tokenize(std::string_view s);
std::size_t token_count(std::string_view s);

/// Fraction of codepoints outside the allowed alphabet: letters of any script,
/// digits, whitespace and the punctuation . , ! ? ; : ' " ( ) -
/// Empty text has ratio 0.
double special_char_ratio(std::string_view s);

/// 1 - distinct/total over word n-grams; 0 when the text has fewer than n words.
/// Throws std::invalid_argument when n == 0.
double ngram_repetition_ratio(std::string_view s, std::size_t n);

/// Removes markup tags and comments, decodes entity escapes, drops control
/// characters and collapses whitespace runs to a single space (trimmed).
/// Applied until a fixpoint, so strip_noise(strip_noise(x)) == strip_noise(x).
std::string strip_noise(std::string_view s);

}  // namespace autodp::text
