#pragma once

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "artmetrics/image_io.hpp"

namespace support {

// Baseline JPEG of an RGB image, quality 95.
inline std::vector<std::uint8_t> encode_jpeg(const artmetrics::PixelImage& img) {
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(img.width * 3);
  while (cinfo.next_scanline < cinfo.image_height) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto& p = img.at(cinfo.next_scanline, x);
      row[3 * x] = artmetrics::to_byte(p.r);
      row[3 * x + 1] = artmetrics::to_byte(p.g);
      row[3 * x + 2] = artmetrics::to_byte(p.b);
    }
    JSAMPROW ptr = row.data();
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buf, buf + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buf);
  return out;
}

inline artmetrics::PixelImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, 255);
  artmetrics::PixelImage img(w, h);
  for (auto& p : img.pixels) {
    p = {level(rng) / 255.0, level(rng) / 255.0, level(rng) / 255.0};
  }
  return img;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("artmetrics-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
