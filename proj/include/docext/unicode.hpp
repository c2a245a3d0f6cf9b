///////////////////////////////////////////////////////////////////////
// File:        unicode.hpp
// Description: UTF-8 helpers backed by ICU: NFC normalization, code
//              point and grapheme decomposition, whitespace splitting.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
///////////////////////////////////////////////////////////////////////

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "docext/error.hpp"

namespace docext::unicode {

namespace detail {

inline icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
  if (!err) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

/// NFC-normalizes UTF-8 text. Ill-formed sequences become U+FFFD.
inline std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(Errc::Io, "ICU NFC normalizer unavailable");
  icu::UnicodeString out = norm->normalize(detail::from_utf8(text), status);
  if (U_FAILURE(status)) throw Error(Errc::Io, "NFC normalization failed");
  return detail::to_utf8(out);
}

/// Decodes UTF-8 into code points without normalizing.
inline std::u32string code_points(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < n;) {
    UChar32 c = 0;
    U8_NEXT(s, i, n, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

inline std::string to_utf8(std::u32string_view cps) {
  std::string out;
  for (char32_t c : cps) detail::append_utf8(out, c);
  return out;
}

/// Extended grapheme clusters of `text`, each as a UTF-8 string.
inline std::vector<std::string> graphemes(std::string_view text) {
  std::vector<std::string> out;
  const icu::UnicodeString u = detail::from_utf8(text);
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) throw Error(Errc::Io, "ICU grapheme iterator unavailable");
  it->setText(u);
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    icu::UnicodeString piece;
    u.extract(start, end - start, piece);
    out.push_back(detail::to_utf8(piece));
  }
  return out;
}

inline bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

inline bool is_punctuation(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

/// Splits on runs of Unicode whitespace; never yields empty tokens.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t c : code_points(text)) {
    if (is_whitespace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      detail::append_utf8(cur, c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Removes leading and trailing Unicode whitespace.
inline std::string trim(std::string_view text) {
  std::u32string cps = code_points(text);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_whitespace(cps[b])) ++b;
  while (e > b && is_whitespace(cps[e - 1])) --e;
  return to_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace docext::unicode
