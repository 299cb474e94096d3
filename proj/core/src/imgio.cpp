// Copyright 2026 The SAda Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sada/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "sada/error.hpp"

namespace sada {

GrayImage::GrayImage(int w, int h, float fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

DisparityMap::DisparityMap(int w, int h)
    : width(w),
      height(h),
      values(static_cast<std::size_t>(w) * h, 0.0f),
      valid(static_cast<std::size_t>(w) * h, 0) {}

std::size_t DisparityMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "PFM and checkpoint I/O assume a little-endian host");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(buf).str();
}

// Netpbm-style header tokenizer: whitespace separated, '#' to end of line is
// a comment. Leaves `pos` just past the single whitespace byte that ends the
// last token.
class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw IoError("truncated header in '" + path_.string() + "'");
    return bytes_.substr(start, pos_ - start);
  }

  long integer() {
    const std::string tok = token();
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw FormatError("bad integer '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      throw FormatError("bad integer '" + tok + "' in '" + path_.string() + "'");
    }
  }

  // Consumes exactly one whitespace byte after the final header token.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size()) throw IoError("truncated header in '" + path_.string() + "'");
    if (bytes_[pos_] == '\r' && pos_ + 1 < bytes_.size() && bytes_[pos_ + 1] == '\n') ++pos_;
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

GrayImage decode_netpbm(const std::string& bytes, const std::filesystem::path& path) {
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("unsupported netpbm variant '" + magic + "' in '" + path.string() + "'");
  }
  const long w = header.integer();
  const long h = header.integer();
  const long maxval = header.integer();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw FormatError("bad netpbm header in '" + path.string() + "'");
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() < offset + count * sample_bytes) {
    throw IoError("truncated pixel data in '" + path.string() + "'");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < img.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t s = i * channels + c;
      const unsigned v = sample_bytes == 1 ? p[s] : (unsigned{p[2 * s]} << 8) | p[2 * s + 1];
      acc += std::min<double>(v, maxval) * scale;
    }
    img.data[i] = static_cast<float>(acc / channels);
  }
  return img;
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) {
  throw IoError(std::string("libpng: ") + msg);
}
void png_warning_handler(png_structp, png_const_charp) {}

struct PngMemoryReader {
  const std::string* bytes;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (src->pos + n > src->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes->data() + src->pos, n);
  src->pos += n;
}

// Returns samples as 16-bit values normalized by `max_value`.
struct RawPng {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawPng decode_png_raw(const std::string& bytes) {
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                 png_warning_handler);
  if (!g.png) throw IoError("libpng: cannot create read struct");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("libpng: cannot create info struct");
  PngMemoryReader src{&bytes, 0};
  png_set_read_fn(g.png, &src, png_read_from_memory);
  png_read_info(g.png, g.info);

  const int color = png_get_color_type(g.png, g.info);
  int depth = png_get_bit_depth(g.png, g.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
  png_read_update_info(g.png, g.info);

  RawPng raw;
  raw.width = static_cast<int>(png_get_image_width(g.png, g.info));
  raw.height = static_cast<int>(png_get_image_height(g.png, g.info));
  raw.channels = png_get_channels(g.png, g.info);
  depth = png_get_bit_depth(g.png, g.info);
  raw.bit_depth = depth;
  const std::size_t rowbytes = png_get_rowbytes(g.png, g.info);
  std::vector<unsigned char> pixels(rowbytes * raw.height);
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = pixels.data() + rowbytes * y;
  png_read_image(g.png, rows.data());

  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  for (int y = 0; y < raw.height; ++y) {
    const unsigned char* row = rows[y];
    for (std::size_t i = 0; i < static_cast<std::size_t>(raw.width) * raw.channels; ++i) {
      const std::size_t dst = static_cast<std::size_t>(y) * raw.width * raw.channels + i;
      raw.samples[dst] = depth == 16 ? static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1])
                                     : row[i];
    }
  }
  return raw;
}

GrayImage decode_png(const std::string& bytes) {
  const RawPng raw = decode_png_raw(bytes);
  const double max_value = raw.bit_depth == 16 ? 65535.0 : 255.0;
  GrayImage img(raw.width, raw.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < raw.channels; ++c) acc += raw.samples[i * raw.channels + c] / max_value;
    img.data[i] = static_cast<float>(acc / raw.channels);
  }
  return img;
}

void encode_png(const std::filesystem::path& path, int width, int height, int channels,
                int bit_depth, const std::vector<unsigned char>& packed) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                  png_warning_handler);
  if (!g.png) throw IoError("libpng: cannot create write struct");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("libpng: cannot create info struct");
  png_init_io(g.png, file.get());
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(g.png, const_cast<png_bytep>(packed.data() + rowbytes * y));
  }
  png_write_end(g.png, nullptr);
  if (std::ferror(file.get())) throw IoError("write failed for '" + path.string() + "'");
}

bool has_png_signature(const std::string& bytes) {
  return bytes.size() >= 8 &&
         png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_netpbm(bytes, path);
  }
  if (has_png_signature(bytes)) return decode_png(bytes);
  if (bytes.size() < 8 && !bytes.empty() && bytes[0] == '\x89') {
    throw IoError("truncated PNG '" + path.string() + "'");
  }
  throw FormatError("unsupported image format in '" + path.string() + "'");
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("PGM bit depth must be 8 or 16");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  out << "P5\n" << image.width << ' ' << image.height << '\n' << maxval << '\n';
  std::string payload;
  payload.reserve(image.size() * (bit_depth / 8));
  for (float v : image.data) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0f, 1.0f) * maxval));
    if (bit_depth == 16) payload.push_back(static_cast<char>(q >> 8));
    payload.push_back(static_cast<char>(q & 0xff));
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_gray_png(const GrayImage& image, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("PNG bit depth must be 8 or 16");
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  std::vector<unsigned char> packed;
  packed.reserve(image.size() * (bit_depth / 8));
  for (float v : image.data) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0f, 1.0f) * maxval));
    if (bit_depth == 16) packed.push_back(static_cast<unsigned char>(q >> 8));
    packed.push_back(static_cast<unsigned char>(q & 0xff));
  }
  encode_png(path, image.width, image.height, 1, bit_depth, packed);
}

void write_pfm(const DisparityMap& map, const std::filesystem::path& path) {
  if (map.values.size() != static_cast<std::size_t>(map.width) * map.height ||
      map.valid.size() != map.values.size()) {
    throw ShapeError("disparity map buffers do not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "Pf\n" << map.width << ' ' << map.height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(map.width));
  constexpr float kInvalid = std::numeric_limits<float>::infinity();
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x) row[x] = map.is_valid(x, y) ? map.value(x, y) : kInvalid;
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DisparityMap read_pfm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  if (magic != "Pf") throw FormatError("expected single-channel 'Pf' PFM, got '" + magic + "'");
  const long w = header.integer();
  const long h = header.integer();
  if (w <= 0 || h <= 0) throw FormatError("bad PFM dimensions in '" + path.string() + "'");
  const std::string scale_tok = header.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::logic_error&) {
    throw FormatError("bad PFM scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("bad PFM scale '" + scale_tok + "'");
  const bool big_endian = scale > 0.0;
  const std::size_t offset = header.payload_offset();
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (bytes.size() < offset + count * sizeof(float)) {
    throw IoError("truncated PFM payload in '" + path.string() + "'");
  }
  DisparityMap map(static_cast<int>(w), static_cast<int>(h));
  const char* p = bytes.data() + offset;
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, p, sizeof(bits));
      p += sizeof(bits);
      if (big_endian) bits = __builtin_bswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (std::isfinite(v)) {
        map.set(x, y, v);
      } else {
        map.invalidate(x, y);
      }
    }
  }
  return map;
}

namespace {

constexpr std::array<Rgb, 9> kRamp{{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

}  // namespace

Rgb colormap_at(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double scaled = t * (kRamp.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(scaled), kRamp.size() - 2);
  const double f = scaled - static_cast<double>(lo);
  auto mix = [f](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
  };
  const Rgb& a = kRamp[lo];
  const Rgb& b = kRamp[lo + 1];
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::vector<Rgb> colorize(const DisparityMap& map) {
  std::vector<Rgb> out(map.size(), Rgb{0, 0, 0});
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid[i] || !std::isfinite(map.values[i])) continue;
    lo = std::min(lo, map.values[i]);
    hi = std::max(hi, map.values[i]);
  }
  if (!(lo <= hi)) return out;
  const double range = static_cast<double>(hi) - lo;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid[i] || !std::isfinite(map.values[i])) continue;
    const double t = range > 0.0 ? (map.values[i] - lo) / range : 0.5;
    out[i] = colormap_at(t);
  }
  return out;
}

void render_colormap(const DisparityMap& map, const std::filesystem::path& path) {
  const std::vector<Rgb> rgb = colorize(map);
  std::vector<unsigned char> packed;
  packed.reserve(rgb.size() * 3);
  for (const Rgb& c : rgb) {
    packed.push_back(c.r);
    packed.push_back(c.g);
    packed.push_back(c.b);
  }
  encode_png(path, map.width, map.height, 3, 8, packed);
}

std::vector<Rgb> read_rgb_png(const std::filesystem::path& path, int& width, int& height) {
  const std::string bytes = read_file(path);
  if (!has_png_signature(bytes)) throw FormatError("'" + path.string() + "' is not a PNG");
  const RawPng raw = decode_png_raw(bytes);
  if (raw.channels != 3 || raw.bit_depth != 8) {
    throw FormatError("'" + path.string() + "' is not 8-bit RGB");
  }
  width = raw.width;
  height = raw.height;
  std::vector<Rgb> out(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {static_cast<std::uint8_t>(raw.samples[3 * i]),
              static_cast<std::uint8_t>(raw.samples[3 * i + 1]),
              static_cast<std::uint8_t>(raw.samples[3 * i + 2])};
  }
  return out;
}

}  // namespace sada
