///////////////////////////////////////////////////////////////////////
// File:        corpus_fixture.hpp
// Description: Small three-language corpus with hand-counted totals.
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

#ifndef DOCEXT_TESTS_CORPUS_FIXTURE_HPP
#define DOCEXT_TESTS_CORPUS_FIXTURE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "docext/corpus.hpp"

namespace corpus_fixture {

namespace fs = std::filesystem;

// File contents by language and basename. Counts below were done by hand:
//
//  eng d1  "The cat sat." | "The dog ran!" | "Sri Lanka"     3 sent, 8 words, 36 B
//  eng d2  "Rs 3,610 paid." | "The end?"                      2 sent, 5 words, 23 B
//  eng d3  "cat"                                              1 sent, 1 word,   3 B
//  tam d1  "அ ஆ." | "அ ஆ"                                      2 sent, 4 words, 16 B
//  tam d2  "இ!"                                               1 sent, 1 word,   4 B
//  tam d3  (empty)                                            0 sent, 0 words,  0 B
//  sin d1  "ක ග ක."                                           1 sent, 3 words, 12 B
//  sin d2  "ක" | "ග" (blank line)                              2 sent, 2 words,  8 B
//  sin d3  "ස." | "—"                                         2 sent, 1 word,   8 B
inline const std::map<std::string, std::map<std::string, std::string>>& contents() {
  static const std::map<std::string, std::map<std::string, std::string>> c = {
      {"eng", {{"d1", "The cat sat. The dog ran!\n\nSri Lanka"}, {"d2", "Rs 3,610 paid. The end?"}, {"d3", "cat"}}},
      {"tam", {{"d1", "அ ஆ. அ ஆ"}, {"d2", "இ!"}, {"d3", ""}}},
      {"sin", {{"d1", "ක ග ක."}, {"d2", "ක\n\nග"}, {"d3", "ස. —"}}},
  };
  return c;
}

inline const std::vector<std::string>& languages() {
  static const std::vector<std::string> l = {"tam", "sin", "eng"};
  return l;
}

struct Expected {
  std::uint64_t nof, nos, now, nouw, ts_bytes;
};

inline const std::map<std::string, Expected>& expected_stats() {
  static const std::map<std::string, Expected> e = {
      {"tam", {3, 3, 5, 3, 20}},
      {"sin", {3, 5, 6, 3, 28}},
      {"eng", {3, 6, 14, 11, 62}},
  };
  return e;
}

/// Full frequency rankings; tam has a tie at the top.
inline const std::map<std::string, docext::corpus::FrequencyTable>& expected_frequencies() {
  static const std::map<std::string, docext::corpus::FrequencyTable> f = {
      {"tam", {{"அ", 2}, {"ஆ", 2}, {"இ", 1}}},
      {"sin", {{"ක", 3}, {"ග", 2}, {"ස", 1}}},
      {"eng",
       {{"The", 3}, {"cat", 2}, {"3,610", 1}, {"Lanka", 1}, {"Rs", 1}, {"Sri", 1}, {"dog", 1}, {"end", 1},
        {"paid", 1}, {"ran", 1}, {"sat", 1}}},
  };
  return f;
}

/// Sentence histograms at bin width 2.
inline const std::map<std::string, docext::corpus::Histogram>& expected_density_bin2() {
  static const std::map<std::string, docext::corpus::Histogram> h = {
      {"tam", {{0, 2}, {2, 1}}},
      {"sin", {{0, 1}, {2, 2}}},
      {"eng", {{0, 1}, {2, 2}}},
  };
  return h;
}

/// Writes root/<lang>/<doc>.txt and returns the language directories.
inline docext::corpus::LanguageDirs write(const fs::path& root) {
  docext::corpus::LanguageDirs dirs;
  for (const auto& lang : languages()) {
    const fs::path dir = root / lang;
    fs::create_directories(dir);
    for (const auto& [doc, text] : contents().at(lang)) std::ofstream(dir / (doc + ".txt"), std::ios::binary) << text;
    dirs.emplace_back(lang, dir);
  }
  return dirs;
}

}  // namespace corpus_fixture

#endif  // DOCEXT_TESTS_CORPUS_FIXTURE_HPP
