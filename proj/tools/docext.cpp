///////////////////////////////////////////////////////////////////////
// File:        docext.cpp
// Description: Command-line front end: text extraction, error-rate
//              evaluation, box-file validation and corpus reports.
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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "docext/atlas.hpp"
#include "docext/corpus.hpp"
#include "docext/error.hpp"
#include "docext/groundtruth.hpp"
#include "docext/image_io.hpp"
#include "docext/metrics.hpp"
#include "docext/pipeline.hpp"
#include "docext/recognizer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

/// Invalid flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  bool json = false;
};

struct ExtractOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> pages_dirs;
  std::string out_dir;
  std::string lang = "tam+sin+eng";
  std::string engine = "tesseract";
  std::string atlas;
  std::string engine_path = "tesseract";
  std::vector<std::string> engine_args;
  std::string rasterizer = "pdftoppm";
  int dpi = 300;
  double scale = 1.0;
  int blur_kernel = 5;
  double blur_sigma = 1.0;
  std::size_t min_area = 10;
  bool dilate = true;
  int dilate_width = 9;
  int dilate_height = 3;
  bool per_region = false;
  unsigned jobs = 0;
  std::string debug_images;
  bool keep_going = false;
  int oem = 3;
  int psm = 1;
};

struct EvaluateOptions {
  std::string ref, hyp, font;
  std::string pairs;
  std::string rows;
  std::string baseline;
  bool grapheme = false;
};

struct GtOptions {
  std::string box;
  std::string tiff;
  double threshold = 0.20;
};

struct CorpusOptions {
  std::string tam, sin, eng;
  std::string out_dir;
  std::size_t top = 10;
  std::uint64_t bin = 100;
  unsigned jobs = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw docext::Error(docext::Errc::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) { docext::pipeline::write_text(p, content); }

double seconds(std::chrono::steady_clock::duration d) { return std::chrono::duration<double>(d).count(); }

// --------------------------------------------------------------------------
// extract

/// Output file for one input: `<stem>.txt` under out_dir, or next to input.
fs::path output_path(const fs::path& input, const std::string& out_dir) {
  fs::path in = input.lexically_normal();
  if (in.filename().empty()) in = in.parent_path();
  const std::string stem = fs::is_directory(input) ? in.filename().string() : in.stem().string();
  const fs::path dir = out_dir.empty() ? in.parent_path() : fs::path(out_dir);
  return dir / (stem + ".txt");
}

int run_extract(const ExtractOptions& o, const GlobalOptions& g) {
  std::vector<fs::path> inputs(o.inputs.begin(), o.inputs.end());
  for (const auto& d : o.pages_dirs) inputs.emplace_back(d);
  if (inputs.empty()) throw UsageError("extract: no input paths (give files or --pages-dir)");

  docext::pipeline::PipelineOptions popts;
  popts.preprocess.scale = o.scale;
  popts.preprocess.blur_kernel = o.blur_kernel;
  popts.preprocess.blur_sigma = o.blur_sigma;
  popts.per_region = o.per_region;
  popts.min_area = o.min_area;
  popts.dilation = {o.dilate, o.dilate_width, o.dilate_height};
  popts.dpi = o.dpi;
  popts.rasterizer = o.rasterizer;
  popts.parallelism = o.jobs;
  if (!o.debug_images.empty()) popts.debug_images = fs::path(o.debug_images);
  popts.recognizer.languages = docext::recognizer::parse_language_stack(o.lang);
  if (popts.recognizer.languages.empty()) throw UsageError("extract: --lang must name at least one language");
  popts.recognizer.engine_mode = o.oem;
  popts.recognizer.page_seg_mode = o.psm;
  popts.recognizer.extra_args = o.engine_args;
  if (o.min_area < 1) throw UsageError("extract: --min-area must be >= 1");

  std::unique_ptr<docext::recognizer::Recognizer> engine;
  if (o.engine == "atlas") {
    if (o.atlas.empty()) throw UsageError("extract: --engine atlas requires --atlas <file>");
    engine = std::make_unique<docext::recognizer::AtlasRecognizer>(docext::recognizer::GlyphAtlas::load(o.atlas));
  } else {
    engine = std::make_unique<docext::recognizer::ExternalRecognizer>(o.engine_path, o.jobs);
  }

  auto items = docext::pipeline::extract_batch(inputs, *engine, popts);

  std::size_t failed = 0;
  ordered_json summary = ordered_json::array();
  std::ostringstream table;
  table << "status\tpages\tchars\tseconds\tsource\toutput\n";
  for (auto& item : items) {
    ordered_json row;
    row["source"] = item.source.string();
    if (item.result) {
      const fs::path out = output_path(item.source, o.out_dir);
      try {
        write_file(out, item.result->joined);
      } catch (const docext::Error& e) {
        item.error = e.what();
        item.result.reset();
      }
      if (item.result) {
        const auto& t = item.result->timing;
        const double total = seconds(t.rasterize + t.load + t.preprocess + t.recognize);
        const auto chars = docext::unicode::code_points(item.result->joined).size();
        row["ok"] = true;
        row["output"] = out.string();
        row["pages"] = item.result->page_count;
        row["chars"] = chars;
        row["seconds"] = {{"rasterize", seconds(t.rasterize)},
                          {"load", seconds(t.load)},
                          {"preprocess", seconds(t.preprocess)},
                          {"recognize", seconds(t.recognize)}};
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.3f", total);
        table << "ok\t" << item.result->page_count << '\t' << chars << '\t' << secs << '\t' << item.source.string()
              << '\t' << out.string() << '\n';
      }
    }
    if (!item.result) {
      ++failed;
      row["ok"] = false;
      row["error"] = item.error;
      table << "FAILED\t-\t-\t-\t" << item.source.string() << "\t-\n";
      std::cerr << "docext: error: " << item.error << '\n';
    }
    summary.push_back(std::move(row));
  }

  if (g.json)
    std::cout << summary.dump(2) << '\n';
  else
    std::cout << table.str();

  if (failed == 0) return kExitOk;
  if (o.keep_going) {
    std::cerr << "docext: warning: " << failed << " of " << items.size() << " document(s) failed\n";
    return kExitOk;
  }
  return kExitError;
}

// --------------------------------------------------------------------------
// evaluate

int run_evaluate(const EvaluateOptions& o, const GlobalOptions& g) {
  namespace m = docext::metrics;
  const int modes = (!o.ref.empty() || !o.hyp.empty()) + !o.pairs.empty() + !o.rows.empty();
  if (modes != 1) throw UsageError("evaluate: give exactly one of --ref/--hyp, --pairs or --rows");
  if ((!o.ref.empty()) != (!o.hyp.empty())) throw UsageError("evaluate: --ref and --hyp go together");
  const auto unit = o.grapheme ? m::CharUnit::Grapheme : m::CharUnit::CodePoint;

  std::vector<m::EvalRow> rows;
  if (!o.ref.empty()) {
    const std::string font = o.font.empty() ? fs::path(o.hyp).stem().string() : o.font;
    rows.push_back(m::evaluate_pair(font, slurp(o.ref), slurp(o.hyp), unit));
    if (!g.json && o.baseline.empty()) {
      std::cout << "CER " << m::format2(rows[0].cer_pct) << '\n' << "WER " << m::format2(rows[0].wer_pct) << '\n';
      return kExitOk;
    }
  } else if (!o.pairs.empty()) {
    // font <TAB> reference file <TAB> hypothesis file; relative to the list.
    const fs::path base = fs::path(o.pairs).parent_path();
    std::istringstream in(slurp(o.pairs));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> f;
      std::size_t pos = 0;
      for (std::size_t tab; (tab = line.find('\t', pos)) != std::string::npos; pos = tab + 1)
        f.push_back(line.substr(pos, tab - pos));
      f.push_back(line.substr(pos));
      if (f.size() != 3)
        throw docext::Error(docext::Errc::BadLine,
                            o.pairs + ": line " + std::to_string(line_no) + ": expected font, ref, hyp (tab-separated)")
            .with_line(line_no);
      auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
      rows.push_back(m::evaluate_pair(f[0], slurp(resolve(f[1])), slurp(resolve(f[2])), unit));
    }
  } else {
    rows = m::parse_report_csv(slurp(o.rows));
  }

  const m::EvalReport report = m::aggregate_report(std::move(rows));
  std::optional<m::EvalReport> baseline;
  if (!o.baseline.empty()) baseline = m::aggregate_report(m::parse_report_csv(slurp(o.baseline)));
  const m::EvalReport* bp = baseline ? &*baseline : nullptr;
  if (g.json)
    std::cout << m::report_json(report, bp).dump(2) << '\n';
  else
    std::cout << m::report_csv(report, bp);
  return kExitOk;
}

// --------------------------------------------------------------------------
// gt-validate

int run_gt_validate(const GtOptions& o, const GlobalOptions& g) {
  namespace gt = docext::groundtruth;
  if (o.threshold < 0.0 || o.threshold > 1.0) throw UsageError("gt-validate: --threshold must be within [0, 1]");

  std::vector<gt::Finding> findings;
  std::vector<gt::BoxEntry> entries;
  try {
    entries = gt::parse_box_file(slurp(o.box));
  } catch (const docext::Error& e) {
    if (e.code() != docext::Errc::BadLine) throw;
    findings.push_back({gt::FindingKind::BadLine, {e.line().value_or(0)}, e.detail()});
  }
  if (findings.empty()) {
    gt::PageDims dims;
    const auto sizes = docext::io::tiff_page_sizes(o.tiff);
    for (std::size_t p = 0; p < sizes.size(); ++p) dims[static_cast<int>(p)] = sizes[p];
    findings = gt::validate_boxes(entries, dims, {o.threshold});
  }

  if (g.json) {
    ordered_json j = ordered_json::array();
    for (const auto& f : findings)
      j.push_back({{"kind", gt::finding_name(f.kind)}, {"entries", f.entries}, {"detail", f.detail}});
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& f : findings) std::cout << gt::finding_tsv(f) << '\n';
  }
  return findings.empty() ? kExitOk : kExitError;
}

// --------------------------------------------------------------------------
// corpus-*

struct LoadedCorpus {
  std::vector<std::string> languages;
  docext::corpus::Alignment alignment;
};

LoadedCorpus load_corpus(const CorpusOptions& o) {
  LoadedCorpus c;
  c.languages = {"tam", "sin", "eng"};
  c.alignment = docext::corpus::align_documents({{"tam", o.tam}, {"sin", o.sin}, {"eng", o.eng}});
  for (const auto& [lang, base] : c.alignment.unaligned)
    std::cerr << "docext: warning: " << lang << '/' << base << ".txt has no counterpart in every language\n";
  return c;
}

int run_corpus_stats(const CorpusOptions& o, const GlobalOptions& g) {
  namespace cp = docext::corpus;
  const auto c = load_corpus(o);
  const auto stats = cp::corpus_stats(c.alignment.triples, c.languages, o.jobs);
  const std::string csv = cp::stats_csv(stats);
  const std::string json = cp::stats_json(stats).dump(2) + "\n";
  if (!o.out_dir.empty()) {
    write_file(fs::path(o.out_dir) / "corpus-stats.csv", csv);
    write_file(fs::path(o.out_dir) / "corpus-stats.json", json);
  }
  std::cout << (g.json ? json : csv);
  return kExitOk;
}

int run_corpus_freq(const CorpusOptions& o, const GlobalOptions& g) {
  namespace cp = docext::corpus;
  if (o.top < 1) throw UsageError("corpus-freq: --top must be >= 1");
  const auto c = load_corpus(o);
  std::vector<cp::FrequencyTable> tables;
  for (const auto& lang : c.languages) tables.push_back(cp::frequency_table(c.alignment.triples, lang, o.top, o.jobs));
  if (!o.out_dir.empty()) {
    for (std::size_t i = 0; i < tables.size(); ++i)
      write_file(fs::path(o.out_dir) / ("frequency-" + c.languages[i] + ".csv"), cp::frequency_csv(tables[i]));
    write_file(fs::path(o.out_dir) / "frequency.csv", cp::frequency_report_csv(c.languages, tables));
  }
  if (g.json) {
    ordered_json j;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      ordered_json rows = ordered_json::array();
      for (const auto& [word, count] : tables[i]) rows.push_back({{"word", word}, {"count", count}});
      j[c.languages[i]] = rows;
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << cp::frequency_report_csv(c.languages, tables);
  }
  return kExitOk;
}

int run_corpus_density(const CorpusOptions& o, const GlobalOptions& g) {
  namespace cp = docext::corpus;
  if (o.bin < 1) throw UsageError("corpus-density: --bin must be >= 1");
  const auto c = load_corpus(o);
  ordered_json j;
  std::ostringstream csv;
  csv << "language,bin,count\n";
  for (const auto& lang : c.languages) {
    const auto h = cp::sentence_density(c.alignment.triples, lang, o.bin, o.jobs);
    if (!o.out_dir.empty()) write_file(fs::path(o.out_dir) / ("density-" + lang + ".csv"), cp::histogram_csv(h));
    ordered_json bins = ordered_json::array();
    for (const auto& [bin, count] : h) {
      csv << lang << ',' << bin << ',' << count << '\n';
      bins.push_back({{"bin", bin}, {"count", count}});
    }
    j[lang] = bins;
  }
  std::cout << (g.json ? j.dump(2) + "\n" : csv.str());
  return kExitOk;
}

void add_corpus_dirs(CLI::App* cmd, CorpusOptions& o) {
  cmd->add_option("--tam", o.tam, "Directory of Tamil .txt documents")->required();
  cmd->add_option("--sin", o.sin, "Directory of Sinhala .txt documents")->required();
  cmd->add_option("--eng", o.eng, "Directory of English .txt documents")->required();
  cmd->add_option("--out-dir", o.out_dir, "Also write report files into this directory");
  cmd->add_option("--jobs", o.jobs, "Worker threads for reading documents (0 = logical CPUs)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document text extraction, OCR evaluation, box-file validation and corpus statistics", "docext"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file setting any flag; [section] per subcommand. Command line wins");

  GlobalOptions g;
  app.add_flag("--json", g.json, "Emit reports as JSON (default: off)");

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Extract text from PDFs, images or page directories");
  extract->add_option("paths", ex.inputs, "Input PDF / PNG / JPEG / TIFF / BMP files or page directories");
  extract->add_option("--pages-dir", ex.pages_dirs, "Directory of pre-rasterized page images, read in file-name order");
  extract->add_option("--out-dir", ex.out_dir, "Write <stem>.txt here instead of next to each input");
  extract->add_option("--lang", ex.lang, "Recognition language stack, '+'-separated");
  extract->add_option("--engine", ex.engine, "Recognition backend")->check(CLI::IsMember({"tesseract", "atlas"}));
  extract->add_option("--atlas", ex.atlas, "Glyph atlas JSON for --engine atlas");
  extract->add_option("--engine-path", ex.engine_path, "Tesseract-compatible executable (model dir from MODEL_DIR)");
  extract->add_option("--engine-arg", ex.engine_args, "Extra argument passed to the engine (repeatable)");
  extract->add_option("--oem", ex.oem, "Engine mode");
  extract->add_option("--psm", ex.psm, "Page segmentation mode");
  extract->add_option("--rasterizer", ex.rasterizer, "PDF rasterizer, called as <exe> -r <dpi> <pdf> <prefix>");
  extract->add_option("--dpi", ex.dpi, "Rasterization resolution")->check(CLI::PositiveNumber);
  extract->add_option("--scale", ex.scale, "Resize factor applied before blurring")->check(CLI::PositiveNumber);
  extract->add_option("--blur-kernel", ex.blur_kernel, "Gaussian kernel size (odd, >= 3; 0 disables blurring)");
  extract->add_option("--blur-sigma", ex.blur_sigma, "Gaussian sigma")->check(CLI::PositiveNumber);
  extract->add_option("--min-area", ex.min_area, "Smallest region kept, in foreground pixels");
  extract->add_flag("--dilate,!--no-dilate", ex.dilate, "Dilate before region detection (default: on)");
  extract->add_option("--dilate-width", ex.dilate_width, "Dilation element width")->check(CLI::PositiveNumber);
  extract->add_option("--dilate-height", ex.dilate_height, "Dilation element height")->check(CLI::PositiveNumber);
  extract->add_flag("--per-region", ex.per_region, "Recognize detected regions in reading order instead of whole pages (default: off)");
  extract->add_option("--jobs", ex.jobs, "Parallel pages/documents and engine processes (0 = logical CPUs)");
  extract->add_option("--debug-images", ex.debug_images, "Write gray/threshold/contour images of every page here");
  extract->add_flag("--keep-going", ex.keep_going, "Exit 0 when some documents fail; failures are listed (default: off)");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Character and word error rates");
  evaluate->add_option("--ref", ev.ref, "Reference text file");
  evaluate->add_option("--hyp", ev.hyp, "Recognized text file");
  evaluate->add_option("--font", ev.font, "Row label for --ref/--hyp (default: hypothesis file stem)");
  evaluate->add_option("--pairs", ev.pairs, "TSV of font, reference file, hypothesis file");
  evaluate->add_option("--rows", ev.rows, "Existing report CSV (font,noc,rc,cer_pct,wer_pct) to re-aggregate");
  evaluate->add_option("--baseline", ev.baseline, "Report CSV of a baseline; adds an ABS_DELTA row");
  evaluate->add_flag("--grapheme", ev.grapheme, "Count grapheme clusters instead of code points (default: off)");

  GtOptions gt;
  auto* gtv = app.add_subcommand("gt-validate", "Check a box file against its multi-page TIFF");
  gtv->add_option("box", gt.box, "Box file")->required();
  gtv->add_option("--tiff", gt.tiff, "Multi-page TIFF the boxes refer to")->required();
  gtv->add_option("--threshold", gt.threshold, "Overlap threshold on intersection over the smaller area");

  CorpusOptions cs, cf, cd;
  auto* stats = app.add_subcommand("corpus-stats", "Files, sentences, words, unique words and size per language");
  add_corpus_dirs(stats, cs);
  auto* freq = app.add_subcommand("corpus-freq", "Most frequent words per language");
  add_corpus_dirs(freq, cf);
  freq->add_option("--top", cf.top, "Words per language");
  auto* density = app.add_subcommand("corpus-density", "Histogram of sentences per document");
  add_corpus_dirs(density, cd);
  density->add_option("--bin", cd.bin, "Bin width in sentences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return run_extract(ex, g);
    if (*evaluate) return run_evaluate(ev, g);
    if (*gtv) return run_gt_validate(gt, g);
    if (*stats) return run_corpus_stats(cs, g);
    if (*freq) return run_corpus_freq(cf, g);
    if (*density) return run_corpus_density(cd, g);
  } catch (const UsageError& e) {
    std::cerr << "docext: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "docext: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
