///////////////////////////////////////////////////////////////////////
// File:        recognizer.hpp
// Description: Character recognition backend contract and the adapter
//              for Tesseract-compatible command line engines.
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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "docext/error.hpp"
#include "docext/image.hpp"
#include "docext/image_io.hpp"
#include "docext/process.hpp"
#include "docext/unicode.hpp"

namespace docext::recognizer {

namespace fs = std::filesystem;

struct RecognizerConfig {
  std::vector<std::string> languages{"tam", "sin", "eng"};
  int engine_mode = 3;    // --oem
  int page_seg_mode = 1;  // --psm
  std::vector<std::string> extra_args;
};

/// "tam+sin+eng" style language stack.
inline std::string language_stack(const RecognizerConfig& cfg) {
  std::string out;
  for (const auto& l : cfg.languages) {
    if (!out.empty()) out += '+';
    out += l;
  }
  return out;
}

/// Parses "tam+eng" into a language list; empty parts are rejected.
inline std::vector<std::string> parse_language_stack(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t plus = std::min(s.find('+', pos), s.size());
    if (plus == pos) throw Error(Errc::BadLine, "empty language in stack '" + std::string(s) + "'");
    out.emplace_back(s.substr(pos, plus - pos));
    pos = plus + 1;
  }
  return out;
}

/// Arguments (after the executable name) for one engine run:
/// `<image> <output_base> -l <stack> --oem <n> --psm <n> <extra...>`.
/// The engine writes its text to `<output_base>.txt`.
inline std::vector<std::string> external_invocation(const RecognizerConfig& cfg, const fs::path& image_path,
                                                    std::optional<fs::path> output_base = std::nullopt) {
  const fs::path base = output_base ? *output_base : fs::path(image_path).replace_extension();
  std::vector<std::string> args{image_path.string(),
                                base.string(),
                                "-l",
                                language_stack(cfg),
                                "--oem",
                                std::to_string(cfg.engine_mode),
                                "--psm",
                                std::to_string(cfg.page_seg_mode)};
  args.insert(args.end(), cfg.extra_args.begin(), cfg.extra_args.end());
  return args;
}

/// Backend contract. Implementations must allow concurrent calls on
/// distinct images.
class Recognizer {
 public:
  virtual ~Recognizer() = default;

  /// UTF-8 text of `region` within `page`, without leading or trailing
  /// whitespace. A blank region yields "".
  virtual std::string recognize(const GrayImage& page, const Region& region, const RecognizerConfig& cfg) const = 0;

  std::string recognize_page(const GrayImage& page, const RecognizerConfig& cfg) const {
    if (page.empty()) return {};
    return recognize(page, Region{0, 0, page.width(), page.height(), 0}, cfg);
  }

 protected:
  static void check_region(const GrayImage& page, const Region& r) {
    if (r.x < 0 || r.y < 0 || r.w < 0 || r.h < 0 || r.right() > page.width() || r.bottom() > page.height())
      throw Error(Errc::BadImage, "region outside page bounds");
  }

  /// True when the region holds no content at all (one gray level).
  static bool is_blank(const GrayImage& page, const Region& r) {
    if (r.w == 0 || r.h == 0) return true;
    const std::uint8_t first = page.at(r.x, r.y);
    for (int y = r.y; y < r.bottom(); ++y)
      for (int x = r.x; x < r.right(); ++x)
        if (page.at(x, y) != first) return false;
    return true;
  }
};

/// Runs a Tesseract-compatible executable per recognition request. Regions
/// are cropped to a scratch PNG first. At most `max_processes` children run
/// at once across all threads using this instance.
class ExternalRecognizer final : public Recognizer {
 public:
  static constexpr std::ptrdiff_t kMaxProcesses = 1024;

  explicit ExternalRecognizer(std::string engine_path = "tesseract", unsigned max_processes = 0)
      : engine_(std::move(engine_path)),
        slots_(std::clamp<std::ptrdiff_t>(max_processes ? max_processes : std::max(1u, std::thread::hardware_concurrency()),
                                          1, kMaxProcesses)) {
    // MODEL_DIR is forwarded as the engine's own model path variable.
    if (const char* dir = std::getenv("MODEL_DIR"); dir && *dir) env_["TESSDATA_PREFIX"] = dir;
  }

  /// Overrides the MODEL_DIR taken from the environment.
  void set_model_dir(const fs::path& dir) { env_["TESSDATA_PREFIX"] = dir.string(); }

  const std::string& engine_path() const noexcept { return engine_; }
  const std::map<std::string, std::string>& child_env() const noexcept { return env_; }

  std::string recognize(const GrayImage& page, const Region& region, const RecognizerConfig& cfg) const override {
    check_region(page, region);
    if (is_blank(page, region)) return {};

    process::TempDir scratch("docext-ocr");
    const fs::path image = scratch.path() / "region.png";
    const fs::path base = scratch.path() / "out";
    io::write_png(image, crop(page, region));

    std::vector<std::string> argv{engine_};
    for (auto& a : external_invocation(cfg, image, base)) argv.push_back(std::move(a));

    process::Result result;
    process::SpawnStatus status;
    {
      slots_.acquire();
      struct Release {
        std::counting_semaphore<kMaxProcesses>& s;
        ~Release() { s.release(); }
      } release{slots_};
      status = process::run(argv, result, env_);
    }
    if (status == process::SpawnStatus::NotFound)
      throw Error(Errc::EngineUnavailable, "cannot start '" + engine_ + "': " + result.output);
    if (status != process::SpawnStatus::Ok)
      throw Error(Errc::EngineUnavailable, "spawning '" + engine_ + "' failed: " + result.output);
    if (result.exit_code != 0)
      throw Error(Errc::EngineFailed,
                  "'" + engine_ + "' exited with status " + std::to_string(result.exit_code) + ": " + result.output);

    std::ifstream in(fs::path(base.string() + ".txt"), std::ios::binary);
    if (!in) throw Error(Errc::EngineFailed, "'" + engine_ + "' produced no output file: " + result.output);
    std::ostringstream text;
    text << in.rdbuf();
    return unicode::trim(text.str());
  }

 private:
  std::string engine_;
  std::map<std::string, std::string> env_;
  mutable std::counting_semaphore<kMaxProcesses> slots_;
};

}  // namespace docext::recognizer
