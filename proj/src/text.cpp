#include "autodp/text.hpp"

#include <unicode/uchar.h>
#include <unicode/uscript.h>

#include <stdexcept>
#include <unordered_set>

namespace autodp::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

std::u32string_view trim_view(std::u32string_view s) {
  while (!s.empty() && s.front() == U' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == U' ') s.remove_suffix(1);
  return s;
}

bool is_control(char32_t c) { return u_charType(static_cast<UChar32>(c)) == U_CONTROL_CHAR; }

bool is_allowed_punct(char32_t c) {
  switch (c) {
    case U'.': case U',': case U'!': case U'?': case U';':
    case U':': case U'\'': case U'"': case U'(': case U')': case U'-':
      return true;
    default:
      return false;
  }
}

// Named entities recognised by strip_noise. Numeric forms are handled separately.
struct NamedEntity {
  std::u32string_view name;
  char32_t value;
};
constexpr NamedEntity kEntities[] = {
    {U"amp", U'&'}, {U"lt", U'<'}, {U"gt", U'>'}, {U"quot", U'"'}, {U"apos", U'\''}, {U"nbsp", 0x00A0},
};

bool valid_scalar(unsigned long v) { return v <= 0x10FFFF && !(v >= 0xD800 && v <= 0xDFFF); }

// Decodes &name; &#123; &#x1F; forms. Unknown or malformed entities are left verbatim.
std::u32string decode_entities(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != U'&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(U';', i + 1);
    if (semi == std::u32string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const auto body = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (!body.empty() && body[0] == U'#') {
      unsigned long v = 0;
      bool hex = body.size() > 1 && (body[1] == U'x' || body[1] == U'X');
      std::size_t start = hex ? 2 : 1;
      bool ok = start < body.size();
      for (std::size_t k = start; ok && k < body.size(); ++k) {
        char32_t c = body[k];
        int digit = -1;
        if (c >= U'0' && c <= U'9') digit = static_cast<int>(c - U'0');
        else if (hex && c >= U'a' && c <= U'f') digit = static_cast<int>(c - U'a' + 10);
        else if (hex && c >= U'A' && c <= U'F') digit = static_cast<int>(c - U'A' + 10);
        if (digit < 0) ok = false;
        else v = v * (hex ? 16 : 10) + static_cast<unsigned long>(digit);
        if (v > 0x10FFFF) ok = false;
      }
      if (ok && valid_scalar(v)) {
        out.push_back(static_cast<char32_t>(v));
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (body == e.name) {
          out.push_back(e.value);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

bool ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

// Drops <!-- comments --> and tag-shaped spans: '<', optional '/' or '!', an ASCII
// letter, then anything but angle brackets up to '>'.
std::u32string remove_tags(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == U'<') {
      if (s.substr(i, 4) == U"<!--") {
        auto end = s.find(U"-->", i + 4);
        if (end != std::u32string_view::npos) {
          i = end + 3;
          continue;
        }
      }
      std::size_t j = i + 1;
      if (j < s.size() && (s[j] == U'/' || s[j] == U'!')) ++j;
      if (j < s.size() && ascii_alpha(s[j])) {
        std::size_t k = j;
        while (k < s.size() && s[k] != U'>' && s[k] != U'<') ++k;
        if (k < s.size() && s[k] == U'>') {
          // Tags separate words, so leave a space behind.
          out.push_back(U' ');
          i = k + 1;
          continue;
        }
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::u32string clean_pass(std::u32string_view s) {
  auto decoded = decode_entities(s);
  auto untagged = remove_tags(decoded);
  std::u32string out;
  out.reserve(untagged.size());
  bool pending_space = false;
  for (char32_t c : untagged) {
    if (is_whitespace(c)) {
      pending_space = true;
      continue;
    }
    if (is_control(c)) continue;
    if (pending_space && !out.empty()) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return std::u32string(trim_view(out));
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (!ok || cp < kMin[len] || !valid_scalar(cp)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_cjk(char32_t c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(c), &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA ||
         script == USCRIPT_HANGUL;
}

bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)) != 0; }
bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)) != 0; }
bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(encode_utf8(current));
      current.clear();
    }
  };
  for (char32_t c : decode_utf8(s)) {
    if (is_whitespace(c)) {
      flush();
    } else if (is_cjk(c)) {
      flush();
      tokens.push_back(encode_utf8(std::u32string_view(&c, 1)));
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::size_t token_count(std::string_view s) { return tokenize(s).size(); }

double special_char_ratio(std::string_view s) {
  const auto cps = decode_utf8(s);
  if (cps.empty()) return 0.0;
  std::size_t special = 0;
  for (char32_t c : cps) {
    if (!(is_letter(c) || is_digit(c) || is_whitespace(c) || is_allowed_punct(c))) ++special;
  }
  return static_cast<double>(special) / static_cast<double>(cps.size());
}

double ngram_repetition_ratio(std::string_view s, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n-gram size must be at least 1");
  const auto words = tokenize(s);
  if (words.size() < n) return 0.0;
  const std::size_t total = words.size() - n + 1;
  std::unordered_set<std::string> distinct;
  distinct.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::string gram;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) gram.push_back('\x1f');
      gram += words[i + k];
    }
    distinct.insert(std::move(gram));
  }
  return 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(total);
}

std::string strip_noise(std::string_view s) {
  std::u32string current = decode_utf8(s);
  for (;;) {
    auto next = clean_pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  return encode_utf8(current);
}

}  // namespace autodp::text
