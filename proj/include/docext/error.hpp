///////////////////////////////////////////////////////////////////////
// File:        error.hpp
// Description: Error kinds shared by every docext module.
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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace docext {

enum class Errc {
  // metrics
  EmptyReference,
  EmptyReport,
  // imgproc
  DegenerateSize,
  BadKernel,
  BadImage,
  // recognizer
  EngineUnavailable,
  EngineFailed,
  // pipeline
  UnknownType,
  RasterizerUnavailable,
  RasterizerFailed,
  ZeroPages,
  // groundtruth
  BadLine,
  UnknownPage,
  // corpus
  MissingDirectory,
  UnreadableFile,
  // generic I/O
  Io,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyReport: return "EmptyReport";
    case Errc::DegenerateSize: return "DegenerateSize";
    case Errc::BadKernel: return "BadKernel";
    case Errc::BadImage: return "BadImage";
    case Errc::EngineUnavailable: return "EngineUnavailable";
    case Errc::EngineFailed: return "EngineFailed";
    case Errc::UnknownType: return "UnknownType";
    case Errc::RasterizerUnavailable: return "RasterizerUnavailable";
    case Errc::RasterizerFailed: return "RasterizerFailed";
    case Errc::ZeroPages: return "ZeroPages";
    case Errc::BadLine: return "BadLine";
    case Errc::UnknownPage: return "UnknownPage";
    case Errc::MissingDirectory: return "MissingDirectory";
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Exception thrown by all docext operations. `page` is set when the failure
/// can be attributed to one page of a multi-page document, `line` when it
/// refers to a 1-based line of a text input.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// Message without the error-kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  std::optional<std::size_t> page() const noexcept { return page_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

  Error& with_page(std::size_t p) {
    page_ = p;
    return *this;
  }
  Error& with_line(std::size_t l) {
    line_ = l;
    return *this;
  }

 private:
  Errc code_;
  std::string detail_;
  std::optional<std::size_t> page_;
  std::optional<std::size_t> line_;
};

}  // namespace docext
