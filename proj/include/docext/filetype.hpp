///////////////////////////////////////////////////////////////////////
// File:        filetype.hpp
// Description: Input kind detection from leading magic bytes.
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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string_view>

#include "docext/error.hpp"

namespace docext::pipeline {

enum class InputKind { Pdf, Png, Jpeg, Tiff, Bmp };

constexpr std::string_view kind_name(InputKind k) noexcept {
  switch (k) {
    case InputKind::Pdf: return "pdf";
    case InputKind::Png: return "png";
    case InputKind::Jpeg: return "jpeg";
    case InputKind::Tiff: return "tiff";
    case InputKind::Bmp: return "bmp";
  }
  return "unknown";
}

/// Number of leading bytes detect_file_type needs.
inline constexpr std::size_t kSniffBytes = 12;

/// Classifies content by signature only; the file name is never consulted.
inline InputKind detect_file_type(std::span<const std::byte> head) {
  if (head.size() < kSniffBytes)
    throw Error(Errc::UnknownType, "need at least " + std::to_string(kSniffBytes) + " bytes to detect type");
  auto starts = [&](std::string_view sig) {
    for (std::size_t i = 0; i < sig.size(); ++i)
      if (head[i] != static_cast<std::byte>(sig[i])) return false;
    return true;
  };
  using namespace std::string_view_literals;
  if (starts("%PDF-"sv)) return InputKind::Pdf;
  if (starts("\x89PNG\r\n\x1a\n"sv)) return InputKind::Png;
  if (starts("\xFF\xD8\xFF"sv)) return InputKind::Jpeg;
  if (starts("II*\0"sv) || starts("MM\0*"sv)) return InputKind::Tiff;
  if (starts("BM"sv)) return InputKind::Bmp;
  throw Error(Errc::UnknownType, "no known signature");
}

inline InputKind detect_file_type(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::byte buf[kSniffBytes];
  in.read(reinterpret_cast<char*>(buf), kSniffBytes);
  try {
    return detect_file_type(std::span<const std::byte>(buf, static_cast<std::size_t>(in.gcount())));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace docext::pipeline
