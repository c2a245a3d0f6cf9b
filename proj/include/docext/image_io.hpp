///////////////////////////////////////////////////////////////////////
// File:        image_io.hpp
// Description: Raster file I/O: PNG (libpng), JPEG (libjpeg), single and
//              multi-page TIFF (libtiff) and uncompressed BMP.
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

#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <jpeglib.h>
#include <png.h>
#include <tiffio.h>

#include "docext/error.hpp"
#include "docext/filetype.hpp"
#include "docext/image.hpp"

namespace docext::io {

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- PNG

inline RgbImage read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(Errc::BadImage, path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  // Transparent pixels composite onto white, which is the page background.
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&image, &white, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(Errc::BadImage, path.string() + ": " + msg);
  }
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return out;
}

namespace detail {

inline void write_png_raw(const fs::path& path, int w, int h, png_uint_32 format, const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr))
    throw Error(Errc::Io, path.string() + ": " + image.message);
}

}  // namespace detail

inline void write_png(const fs::path& path, const GrayImage& img) {
  detail::write_png_raw(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.pixels().data());
}

inline void write_png(const fs::path& path, const RgbImage& img) {
  static_assert(sizeof(Rgb) == 3);
  detail::write_png_raw(path, img.width(), img.height(), PNG_FORMAT_RGB, img.pixels().data());
}

inline void write_png(const fs::path& path, const BinaryImage& img) { write_png(path, to_gray(img)); }

// ---------------------------------------------------------------- JPEG

namespace detail {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" inline void jpeg_throw_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

extern "C" inline void jpeg_silent(j_common_ptr, int) {}

// Only trivially destructible locals live between setjmp and longjmp here.
inline bool jpeg_decode(const std::uint8_t* data, std::size_t size, std::vector<std::uint8_t>& out, int& w,
                        int& h, char* message) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_throw_exit;
  err.mgr.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  out.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * static_cast<std::size_t>(w) * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline bool jpeg_encode(const std::uint8_t* rgb, int w, int h, int quality, unsigned char** mem,
                        unsigned long* mem_size, char* message) {
  jpeg_compress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_throw_exit;
  err.mgr.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, mem, mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(rgb) + static_cast<std::size_t>(cinfo.next_scanline) * w * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace detail

inline RgbImage read_jpeg(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  std::vector<std::uint8_t> buf;
  int w = 0, h = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!detail::jpeg_decode(bytes.data(), bytes.size(), buf, w, h, message))
    throw Error(Errc::BadImage, path.string() + ": " + message);
  RgbImage out(w, h);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return out;
}

inline void write_jpeg(const fs::path& path, const RgbImage& img, int quality = 95) {
  unsigned char* mem = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = detail::jpeg_encode(reinterpret_cast<const std::uint8_t*>(img.pixels().data()), img.width(),
                                      img.height(), quality, &mem, &size, message);
  std::unique_ptr<unsigned char, decltype(&std::free)> owned(mem, &std::free);
  if (!ok) throw Error(Errc::Io, path.string() + ": " + message);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(mem), static_cast<std::streamsize>(size));
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

// ---------------------------------------------------------------- TIFF

namespace detail {

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

inline TiffHandle open_tiff(const fs::path& path, const char* mode) {
  // libtiff reports through global handlers; failures surface via return codes.
  TIFFSetErrorHandler(nullptr);
  TIFFSetWarningHandler(nullptr);
  TiffHandle t(TIFFOpen(path.c_str(), mode));
  if (!t) throw Error(std::string(mode) == "r" ? Errc::BadImage : Errc::Io, "cannot open TIFF " + path.string());
  return t;
}

}  // namespace detail

/// Every directory (page) of a TIFF, decoded to RGB.
inline std::vector<RgbImage> read_tiff(const fs::path& path) {
  auto tif = detail::open_tiff(path, "r");
  std::vector<RgbImage> pages;
  do {
    uint32_t w = 0, h = 0;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16))
      throw Error(Errc::BadImage, path.string() + ": bad page size").with_page(pages.size());
    std::vector<uint32_t> raster(static_cast<std::size_t>(w) * h);
    if (!TIFFReadRGBAImageOriented(tif.get(), w, h, raster.data(), ORIENTATION_TOPLEFT, 0))
      throw Error(Errc::BadImage, path.string() + ": cannot decode page " + std::to_string(pages.size()))
          .with_page(pages.size());
    RgbImage page(static_cast<int>(w), static_cast<int>(h));
    auto px = page.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const uint32_t v = raster[i];
      const uint32_t a = TIFFGetA(v);
      // Composite onto white like the PNG reader.
      auto ch = [a](uint32_t c) { return static_cast<std::uint8_t>((c * a + 255 * (255 - a) + 127) / 255); };
      px[i] = {ch(TIFFGetR(v)), ch(TIFFGetG(v)), ch(TIFFGetB(v))};
    }
    pages.push_back(std::move(page));
  } while (TIFFReadDirectory(tif.get()));
  return pages;
}

/// (width, height) of each TIFF page, without decoding pixels.
inline std::vector<std::pair<int, int>> tiff_page_sizes(const fs::path& path) {
  auto tif = detail::open_tiff(path, "r");
  std::vector<std::pair<int, int>> sizes;
  do {
    uint32_t w = 0, h = 0;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
    sizes.emplace_back(static_cast<int>(w), static_cast<int>(h));
  } while (TIFFReadDirectory(tif.get()));
  return sizes;
}

/// Writes one 8-bit grayscale page per image, deflate-compressed.
inline void write_tiff(const fs::path& path, const std::vector<GrayImage>& pages) {
  if (pages.empty()) throw Error(Errc::Io, "refusing to write a TIFF with no pages");
  auto tif = detail::open_tiff(path, "w");
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const GrayImage& img = pages[p];
    TIFF* t = tif.get();
    TIFFSetField(t, TIFFTAG_IMAGEWIDTH, static_cast<uint32_t>(img.width()));
    TIFFSetField(t, TIFFTAG_IMAGELENGTH, static_cast<uint32_t>(img.height()));
    TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, 1);
    TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, 8);
    TIFFSetField(t, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(t, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(t, TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
    TIFFSetField(t, TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(t, 0));
    TIFFSetField(t, TIFFTAG_SUBFILETYPE, FILETYPE_PAGE);
    TIFFSetField(t, TIFFTAG_PAGENUMBER, static_cast<uint16_t>(p), static_cast<uint16_t>(pages.size()));
    for (int y = 0; y < img.height(); ++y) {
      auto row = img.row(y);
      if (TIFFWriteScanline(t, const_cast<std::uint8_t*>(row.data()), static_cast<uint32_t>(y), 0) < 0)
        throw Error(Errc::Io, "TIFF write failed: " + path.string());
    }
    if (!TIFFWriteDirectory(t)) throw Error(Errc::Io, "TIFF write failed: " + path.string());
  }
}

// ---------------------------------------------------------------- BMP

namespace detail {

inline uint32_t le32(const std::uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
inline uint16_t le16(const std::uint8_t* p) { return static_cast<uint16_t>(p[0] | p[1] << 8); }

inline void put32(std::vector<std::uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put16(std::vector<std::uint8_t>& b, uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace detail

/// Uncompressed BMP: 1/4/8-bit palettized, 24-bit and 32-bit (BI_RGB or
/// standard BITFIELDS masks). Bottom-up and top-down rows are both accepted.
inline RgbImage decode_bmp(const std::vector<std::uint8_t>& b, const std::string& name = "bmp") {
  auto fail = [&](const std::string& why) { return Error(Errc::BadImage, name + ": " + why); };
  if (b.size() < 54 || b[0] != 'B' || b[1] != 'M') throw fail("not a BMP file");
  const uint32_t data_off = detail::le32(&b[10]);
  const uint32_t dib = detail::le32(&b[14]);
  if (dib < 40 || 14 + static_cast<std::size_t>(dib) > b.size()) throw fail("unsupported DIB header");
  const auto width = static_cast<int32_t>(detail::le32(&b[18]));
  const auto raw_h = static_cast<int32_t>(detail::le32(&b[22]));
  const uint16_t bpp = detail::le16(&b[28]);
  const uint32_t compression = detail::le32(&b[30]);
  uint32_t colors = detail::le32(&b[46]);
  if (width <= 0 || raw_h == 0 || raw_h == INT32_MIN || width > (1 << 16) || std::abs(raw_h) > (1 << 16))
    throw fail("bad dimensions");
  if (!(compression == 0 || (compression == 3 && bpp == 32))) throw fail("compressed BMP not supported");
  if (bpp != 1 && bpp != 4 && bpp != 8 && bpp != 24 && bpp != 32) throw fail("unsupported bit depth");

  const bool top_down = raw_h < 0;
  const int height = top_down ? -raw_h : raw_h;
  std::vector<Rgb> palette;
  if (bpp <= 8) {
    if (colors == 0) colors = 1u << bpp;
    const std::size_t pal_off = 14 + dib;
    if (colors > 256 || pal_off + 4 * static_cast<std::size_t>(colors) > b.size()) throw fail("bad palette");
    for (uint32_t i = 0; i < colors; ++i) {
      const std::uint8_t* p = &b[pal_off + 4 * i];
      palette.push_back({p[2], p[1], p[0]});
    }
  }
  const std::size_t stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (data_off + stride * static_cast<std::size_t>(height) > b.size()) throw fail("truncated pixel data");

  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = &b[data_off + stride * static_cast<std::size_t>(top_down ? y : height - 1 - y)];
    for (int x = 0; x < width; ++x) {
      Rgb px;
      if (bpp == 24 || bpp == 32) {
        const std::uint8_t* p = row + static_cast<std::size_t>(x) * (bpp / 8);
        px = {p[2], p[1], p[0]};
      } else {
        const std::size_t bit = static_cast<std::size_t>(x) * bpp;
        const unsigned shift = 8 - bpp - static_cast<unsigned>(bit % 8);
        const unsigned idx = (row[bit / 8] >> shift) & ((1u << bpp) - 1);
        if (idx >= palette.size()) throw fail("palette index out of range");
        px = palette[idx];
      }
      out.at(x, y) = px;
    }
  }
  return out;
}

inline RgbImage read_bmp(const fs::path& path) { return decode_bmp(read_bytes(path), path.string()); }

/// 24-bit bottom-up BMP.
inline void write_bmp(const fs::path& path, const RgbImage& img) {
  const std::size_t stride = ((static_cast<std::size_t>(img.width()) * 24 + 31) / 32) * 4;
  const auto data_size = static_cast<uint32_t>(stride * static_cast<std::size_t>(img.height()));
  std::vector<std::uint8_t> b;
  b.reserve(54 + data_size);
  b.push_back('B');
  b.push_back('M');
  detail::put32(b, 54 + data_size);
  detail::put32(b, 0);
  detail::put32(b, 54);
  detail::put32(b, 40);
  detail::put32(b, static_cast<uint32_t>(img.width()));
  detail::put32(b, static_cast<uint32_t>(img.height()));
  detail::put16(b, 1);
  detail::put16(b, 24);
  detail::put32(b, 0);
  detail::put32(b, data_size);
  detail::put32(b, 2835);  // 72 dpi
  detail::put32(b, 2835);
  detail::put32(b, 0);
  detail::put32(b, 0);
  for (int y = img.height() - 1; y >= 0; --y) {
    std::size_t written = 0;
    for (const Rgb& p : img.row(y)) {
      b.push_back(p.b);
      b.push_back(p.g);
      b.push_back(p.r);
      written += 3;
    }
    for (; written < stride; ++written) b.push_back(0);
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

// ---------------------------------------------------------------- Netpbm

/// Binary PBM/PGM/PPM (P4/P5/P6) with maxval <= 255; the default output of
/// common PDF rasterizers.
inline RgbImage decode_netpbm(const std::vector<std::uint8_t>& b, const std::string& name = "pnm") {
  auto fail = [&](const std::string& why) { return Error(Errc::BadImage, name + ": " + why); };
  if (b.size() < 3 || b[0] != 'P' || (b[1] != '4' && b[1] != '5' && b[1] != '6')) throw fail("not a binary netpbm file");
  const char kind = static_cast<char>(b[1]);
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < b.size() && std::isspace(b[pos])) ++pos;
      if (pos < b.size() && b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    long v = 0;
    const std::size_t start = pos;
    while (pos < b.size() && std::isdigit(b[pos]) && v < (1L << 20)) v = v * 10 + (b[pos++] - '0');
    if (pos == start) throw fail("malformed header");
    return v;
  };
  const long w = next_int(), h = next_int();
  const long maxval = kind == '4' ? 1 : next_int();
  if (w < 1 || h < 1 || w > (1 << 16) || h > (1 << 16)) throw fail("bad dimensions");
  if (maxval < 1 || maxval > 255) throw fail("only 8-bit samples are supported");
  ++pos;  // single whitespace before the raster

  const std::size_t channels = kind == '6' ? 3 : 1;
  const std::size_t stride = kind == '4' ? (static_cast<std::size_t>(w) + 7) / 8 : static_cast<std::size_t>(w) * channels;
  if (pos + stride * static_cast<std::size_t>(h) > b.size()) throw fail("truncated raster");

  RgbImage out(static_cast<int>(w), static_cast<int>(h));
  auto scale = [maxval](std::uint8_t v) { return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval); };
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = &b[pos + stride * static_cast<std::size_t>(y)];
    for (int x = 0; x < w; ++x) {
      if (kind == '4') {
        const bool ink = (row[x / 8] >> (7 - x % 8)) & 1;
        const std::uint8_t v = ink ? 0 : 255;
        out.at(x, y) = {v, v, v};
      } else if (kind == '5') {
        const std::uint8_t v = scale(row[x]);
        out.at(x, y) = {v, v, v};
      } else {
        const std::uint8_t* p = row + 3 * static_cast<std::size_t>(x);
        out.at(x, y) = {scale(p[0]), scale(p[1]), scale(p[2])};
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- dispatch

/// All pages of a raster file, format chosen by magic bytes. PDFs are not
/// rasters and are rejected here.
inline std::vector<RgbImage> read_pages(const fs::path& path) {
  switch (pipeline::detect_file_type(path)) {
    case pipeline::InputKind::Png: return {read_png(path)};
    case pipeline::InputKind::Jpeg: return {read_jpeg(path)};
    case pipeline::InputKind::Bmp: return {read_bmp(path)};
    case pipeline::InputKind::Tiff: return read_tiff(path);
    case pipeline::InputKind::Pdf: break;
  }
  throw Error(Errc::UnknownType, path.string() + ": PDF must be rasterized first");
}

}  // namespace docext::io
