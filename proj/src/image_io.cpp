#include "snn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "snn/error.hpp"

namespace snn {

namespace {

// Next header token of a netpbm file, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  const std::string magic = pnm_token(in);
  if (magic != "P5") throw DataError(path.string() + ": unsupported PGM variant '" + magic + "' (need P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0) throw DataError(path.string() + ": malformed PGM header");
  if (maxval > 255)
    throw DataError(path.string() + ": unsupported bit depth (maxval " + std::to_string(maxval) +
                    ", need 8-bit)");
  std::vector<unsigned char> raw(static_cast<size_t>(w) * static_cast<size_t>(h));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw DataError(path.string() + ": truncated PGM payload");
  Image img;
  img.max_value = 255.0;
  img.pixels.resize(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      img.pixels(r, c) = raw[static_cast<size_t>(r) * static_cast<size_t>(w) + static_cast<size_t>(c)] *
                         (255.0 / maxval);
  return img;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

Image load_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open image " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw DataError(path.string() + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": libpng initialisation failed");
  }
  Image img;
  std::vector<png_byte> raw;
  std::vector<png_bytep> rows;
  // libpng reports errors by longjmp; objects with destructors must already
  // exist before the jump target is set.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": only grayscale PNG images are supported");
  }
  if (depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": unsupported bit depth " + std::to_string(depth) +
                    " (need 8-bit)");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  raw.resize(static_cast<size_t>(w) * h);
  rows.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = raw.data() + static_cast<size_t>(r) * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img.max_value = 255.0;
  img.pixels.resize(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w));
  for (png_uint_32 r = 0; r < h; ++r)
    for (png_uint_32 c = 0; c < w; ++c) img.pixels(r, c) = raw[static_cast<size_t>(r) * w + c];
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".png") return load_png(path);
  throw DataError(path.string() + ": unsupported image format (need .pgm or .png)");
}

void save_pgm(const std::filesystem::path& path, const Matrix& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image " + path.string());
  out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  std::vector<unsigned char> raw(static_cast<size_t>(pixels.size()));
  for (Eigen::Index r = 0; r < pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < pixels.cols(); ++c)
      raw[static_cast<size_t>(r * pixels.cols() + c)] =
          static_cast<unsigned char>(std::clamp(std::lround(pixels(r, c)), 0L, 255L));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError("failed writing image " + path.string());
}

}  // namespace snn
