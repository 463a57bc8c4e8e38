#pragma once

#include <png.h>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"

namespace xmloc {

// 8-bit interleaved raster, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t& at(int r, int c, int ch = 0) { return data[(static_cast<std::size_t>(r) * width + c) * channels + ch]; }
  std::uint8_t at(int r, int c, int ch = 0) const { return data[(static_cast<std::size_t>(r) * width + c) * channels + ch]; }

  friend bool operator==(const Image8&, const Image8&) = default;
};

inline Image8 read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw InputFormatError(path.string() + ": " + img.message);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out(static_cast<int>(img.width), static_cast<int>(img.height), color ? 3 : 1);
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw InputFormatError(path.string() + ": " + msg);
  }
  return out;
}

inline void write_png(const Image8& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) throw InvalidArgument("write_png: 1 or 3 channels required");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.data.data(), 0, nullptr))
    throw IoError(path.string() + ": " + img.message);
}

namespace detail {

inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace detail

// Reads binary (P5) or ASCII (P2) PGM; 16-bit samples are scaled to 8 bits.
inline Image8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path.string());
  const std::string magic = detail::pgm_token(in);
  if (magic != "P5" && magic != "P2") throw InputFormatError(path.string() + ": not a PGM file");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(detail::pgm_token(in));
    h = std::stoi(detail::pgm_token(in));
    maxval = std::stoi(detail::pgm_token(in));
  } catch (const std::exception&) {
    throw InputFormatError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw InputFormatError(path.string() + ": invalid PGM header values");
  Image8 out(w, h, 1);
  const std::size_t n = out.data.size();
  auto scale = [maxval](unsigned v) {
    return static_cast<std::uint8_t>((v * 255u + static_cast<unsigned>(maxval) / 2u) / static_cast<unsigned>(maxval));
  };
  if (magic == "P5") {
    const std::size_t bps = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bps);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw InputFormatError(path.string() + ": truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bps == 2 ? (raw[2 * i] << 8u) | raw[2 * i + 1] : raw[i];
      out.data[i] = maxval == 255 ? static_cast<std::uint8_t>(v) : scale(v);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tok = detail::pgm_token(in);
      if (tok.empty()) throw InputFormatError(path.string() + ": truncated PGM data");
      const unsigned v = static_cast<unsigned>(std::stoul(tok));
      out.data[i] = maxval == 255 ? static_cast<std::uint8_t>(v) : scale(v);
    }
  }
  return out;
}

inline void write_pgm(const Image8& image, const std::filesystem::path& path) {
  if (image.channels != 1) throw InvalidArgument("write_pgm: single channel required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// Dispatches on extension (.png, otherwise PGM).
inline Image8 read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw InputFormatError(path.string() + ": unsupported image type (expected .png or .pgm)");
}

}  // namespace xmloc
