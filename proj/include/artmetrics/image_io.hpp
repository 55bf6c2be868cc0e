#pragma once

// Raster decoding, bicubic resampling and RGB -> grayscale / HSV conversion.
// All channel values are proportions in [0,1].

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <jerror.h>
#include <png.h>

#include "artmetrics/error.hpp"

namespace artmetrics {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct PixelImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major, height rows of width pixels

  PixelImage() = default;
  PixelImage(std::size_t w, std::size_t h, Rgb fill = {})
      : width(w), height(h), pixels(w * h, fill) {}

  Rgb& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  const Rgb& at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

struct GrayMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  GrayMatrix() = default;
  GrayMatrix(std::size_t m, std::size_t n, double fill = 0.0)
      : rows(m), cols(n), values(m * n, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

struct HsvPixel {
  std::optional<double> hue;  // degrees in [0,360); empty when max == min
  double saturation = 0.0;
  double value = 0.0;
};

namespace detail {

inline bool has_png_signature(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> sig{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
}

inline bool has_jpeg_signature(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

inline PixelImage from_interleaved(const std::uint8_t* data, std::size_t w, std::size_t h,
                                   std::size_t channels) {
  PixelImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    const std::uint8_t* px = data + i * channels;
    if (channels < 3) {
      const double v = px[0] / 255.0;
      img.pixels[i] = {v, v, v};
    } else {
      img.pixels[i] = {px[0] / 255.0, px[1] / 255.0, px[2] / 255.0};
    }
  }
  return img;
}

inline PixelImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::CorruptStream, "png header: " + msg);
  }
  // Read with alpha so transparent pixels are not composited; alpha is discarded below.
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::CorruptStream, "png data: " + msg);
  }
  if (image.width == 0 || image.height == 0) {
    throw Error(ErrorCode::CorruptStream, "png has zero extent");
  }
  return from_interleaved(buffer.data(), image.width, image.height, 4);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  bool truncated = false;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit_handler(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

inline void jpeg_emit_message_handler(j_common_ptr cinfo, int level) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  // libjpeg pads a short stream with a fake EOI and reports it only as a warning.
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) mgr->truncated = true;
}

inline PixelImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  std::vector<std::uint8_t> buffer;
  std::size_t w = 0;
  std::size_t h = 0;
  std::size_t channels = 0;

  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit_handler;
  err.base.emit_message = jpeg_emit_message_handler;
  err.message[0] = '\0';

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::CorruptStream, std::string("jpeg: ") + err.message);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_GRAYSCALE) {
    cinfo.out_color_space = JCS_GRAYSCALE;
  } else {
    cinfo.out_color_space = JCS_RGB;
  }
  jpeg_start_decompress(&cinfo);
  w = cinfo.output_width;
  h = cinfo.output_height;
  channels = static_cast<std::size_t>(cinfo.output_components);
  buffer.resize(w * h * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  if (err.truncated) throw Error(ErrorCode::CorruptStream, "jpeg: premature end of data");
  if (w == 0 || h == 0) throw Error(ErrorCode::CorruptStream, "jpeg has zero extent");
  return from_interleaved(buffer.data(), w, h, channels);
}

}  // namespace detail

/// Decodes a PNG or JPEG byte stream. Alpha is dropped, gray sources expand to R=G=B.
inline PixelImage decode_image(std::span<const std::uint8_t> bytes) {
  if (detail::has_png_signature(bytes)) return detail::decode_png(bytes);
  if (detail::has_jpeg_signature(bytes)) return detail::decode_jpeg(bytes);
  throw Error(ErrorCode::UnsupportedFormat, "stream is neither PNG nor JPEG");
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline PixelImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_image(bytes);
}

inline std::uint8_t to_byte(double proportion) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(proportion, 0.0, 1.0) * 255.0));
}

/// Lossless 8-bit RGB PNG encoding (used for round-trips and synthetic bundles).
inline std::vector<std::uint8_t> encode_png(const PixelImage& img) {
  std::vector<std::uint8_t> rgb(img.width * img.height * 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    rgb[3 * i] = to_byte(img.pixels[i].r);
    rgb[3 * i + 1] = to_byte(img.pixels[i].g);
    rgb[3 * i + 2] = to_byte(img.pixels[i].b);
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

/// 8-bit single channel PNG from row-major byte levels.
inline std::vector<std::uint8_t> encode_png_gray(std::span<const std::uint8_t> levels,
                                                 std::size_t width, std::size_t height) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, levels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, levels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

// Keys cubic convolution kernel.
inline double keys_kernel(double x, double a = -0.5) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace detail {

struct ResampleTaps {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

// Pixel-center alignment with clamp-to-edge replication.
inline std::vector<ResampleTaps> resample_taps(std::size_t in, std::size_t out) {
  std::vector<ResampleTaps> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const auto last = static_cast<std::ptrdiff_t>(in) - 1;
  for (std::size_t d = 0; d < out; ++d) {
    const double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double frac = src - base;
    for (int k = 0; k < 4; ++k) {
      const auto idx = static_cast<std::ptrdiff_t>(base) - 1 + k;
      taps[d].index[k] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, last));
      taps[d].weight[k] = keys_kernel(frac - static_cast<double>(k - 1));
    }
  }
  return taps;
}

}  // namespace detail

/// Separable bicubic (Keys, a = -0.5) resampling; the output is clamped to [0,1].
/// Aspect ratio is not preserved.
inline PixelImage resize_bicubic(const PixelImage& img, std::size_t target_w, std::size_t target_h) {
  if (target_w == 0 || target_h == 0) {
    throw Error(ErrorCode::InvalidArgument, "resize target must be at least 1x1");
  }
  const auto col_taps = detail::resample_taps(img.width, target_w);
  const auto row_taps = detail::resample_taps(img.height, target_h);

  // Horizontal pass into an unclamped intermediate.
  std::vector<Rgb> mid(img.height * target_w);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < target_w; ++x) {
      Rgb acc;
      for (int k = 0; k < 4; ++k) {
        const Rgb& p = img.at(y, col_taps[x].index[k]);
        const double w = col_taps[x].weight[k];
        acc.r += w * p.r;
        acc.g += w * p.g;
        acc.b += w * p.b;
      }
      mid[y * target_w + x] = acc;
    }
  }

  PixelImage out(target_w, target_h);
  for (std::size_t y = 0; y < target_h; ++y) {
    for (std::size_t x = 0; x < target_w; ++x) {
      Rgb acc;
      for (int k = 0; k < 4; ++k) {
        const Rgb& p = mid[row_taps[y].index[k] * target_w + x];
        const double w = row_taps[y].weight[k];
        acc.r += w * p.r;
        acc.g += w * p.g;
        acc.b += w * p.b;
      }
      out.at(y, x) = {std::clamp(acc.r, 0.0, 1.0), std::clamp(acc.g, 0.0, 1.0),
                      std::clamp(acc.b, 0.0, 1.0)};
    }
  }
  return out;
}

/// NTSC luminance 0.3 R + 0.59 G + 0.11 B.
inline double gray_level(const Rgb& p) {
  if (p.r == p.g && p.g == p.b) return p.r;  // exact for neutral pixels
  return std::clamp(0.3 * p.r + 0.59 * p.g + 0.11 * p.b, 0.0, 1.0);
}

inline GrayMatrix to_gray(const PixelImage& img) {
  GrayMatrix m(img.height, img.width);
  std::transform(img.pixels.begin(), img.pixels.end(), m.values.begin(), gray_level);
  return m;
}

inline HsvPixel to_hsv(const Rgb& p) {
  const double hi = std::max({p.r, p.g, p.b});
  const double lo = std::min({p.r, p.g, p.b});
  HsvPixel out;
  out.value = hi;
  out.saturation = hi != 0.0 ? (hi - lo) / hi : 0.0;
  if (hi == lo) return out;

  const double span = hi - lo;
  double hue = 0.0;
  if (hi == p.r) {
    hue = 60.0 * (p.g - p.b) / span;
    if (p.g < p.b) {
      hue += 360.0;
      // keep the G < B branch inside (300, 360)
      if (hue >= 360.0) hue = std::nextafter(360.0, 0.0);
    }
  } else if (hi == p.g) {
    hue = 60.0 * (p.b - p.r) / span + 120.0;
  } else {
    hue = 60.0 * (p.r - p.g) / span + 240.0;
  }
  out.hue = hue;
  return out;
}

}  // namespace artmetrics
