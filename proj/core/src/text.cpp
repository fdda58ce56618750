#include "termweave/text.hpp"

namespace termweave::text {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(char32_t{0xFFFD});
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) {
        ok = false;
        break;
      }
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(char32_t{0xFFFD});
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_letter(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp <= 0x24F) return true;                     // Latin-1 supplement, Latin extended A/B
  if (cp >= 0x250 && cp <= 0x2AF) return true;      // IPA extensions
  if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;  // Greek
  if (cp >= 0x400 && cp <= 0x52F) return cp < 0x482 || cp > 0x489;  // Cyrillic
  if (cp >= 0x531 && cp <= 0x587) return true;      // Armenian
  if (cp >= 0x5D0 && cp <= 0x5EA) return true;      // Hebrew
  if (cp >= 0x620 && cp <= 0x64A) return true;      // Arabic
  if (cp >= 0x904 && cp <= 0x939) return true;      // Devanagari
  if (cp >= 0x1E00 && cp <= 0x1EFF) return true;    // Latin extended additional
  if (cp >= 0x3040 && cp <= 0x30FF) return true;    // Hiragana, Katakana
  if (cp >= 0x4E00 && cp <= 0x9FFF) return true;    // CJK unified ideographs
  if (cp >= 0xAC00 && cp <= 0xD7A3) return true;    // Hangul syllables
  return false;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

namespace {

char32_t lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F && cp != 0x130 && cp != 0x138 && cp != 0x149 && cp != 0x17F) {
    // Latin extended A alternates upper/lower, with an offset between 0x139 and 0x148
    // and again after 0x178.
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
      return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic basic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

bool word_char(char32_t cp) { return is_letter(cp) || is_digit(cp) || cp == U'_'; }

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

}  // namespace

std::string to_lower(std::string_view s) {
  bool ascii = true;
  for (char c : s) {
    if (static_cast<unsigned char>(c) >= 0x80) {
      ascii = false;
      break;
    }
  }
  std::string out;
  out.reserve(s.size());
  if (ascii) {
    for (char c : s) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c);
    return out;
  }
  for (char32_t cp : decode_utf8(s)) append_utf8(out, lower(cp));
  return out;
}

std::size_t code_point_count(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<std::string> split_words(std::string_view s) {
  const auto cps = decode_utf8(s);
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!word_char(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size()) {
      if (word_char(cps[j])) {
        ++j;
      } else if (is_apostrophe(cps[j]) && j + 1 < cps.size() && is_letter(cps[j + 1]) && j > i) {
        ++j;
      } else {
        break;
      }
    }
    std::size_t end = j;
    // strip possessive 's
    if (end - i >= 3 && is_apostrophe(cps[end - 2]) && (cps[end - 1] == U's' || cps[end - 1] == U'S')) {
      end -= 2;
    }
    std::string word;
    for (std::size_t k = i; k < end; ++k) append_utf8(word, cps[k]);
    words.push_back(std::move(word));
    i = j;
  }
  return words;
}

}  // namespace termweave::text
