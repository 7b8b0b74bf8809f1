#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "drowsy/errors.hpp"

namespace drowsy {

struct Extent {
  int width = 0;
  int height = 0;
};

// Row-major single-channel 8-bit image; pixel (x, y) lives at data[y*width + x].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool valid() const {
    return width >= 1 && height >= 1 &&
           data.size() == static_cast<std::size_t>(width) * height;
  }
  Extent extent() const { return {width, height}; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Row-major interleaved 8-bit RGB; pixel (x, y) starts at data[3*(y*width + x)].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h),
        data(3u * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  bool valid() const {
    return width >= 1 && height >= 1 &&
           data.size() == 3u * static_cast<std::size_t>(width) * height;
  }
};

struct CropBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }

  // Intersection with [0, frame.width) x [0, frame.height). May come back empty.
  CropBox clamped(Extent frame) const;

  friend bool operator==(const CropBox&, const CropBox&) = default;
};

// Round-half-up to the nearest integer, clamped into [0, 255].
inline std::uint8_t clamp_round_u8(double v) {
  const double r = std::floor(v + 0.5);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B) per pixel.
GrayImage to_grayscale(const RgbImage& img);

// Classic 256-bin CDF equalization mapped to [0, 255]. A constant image is
// returned unchanged (the scaling denominator would be 0/0).
GrayImage equalize_histogram(const GrayImage& img);

// Extracts box from img. The box must be non-empty and fully inside the image;
// clamp beforehand with CropBox::clamped.
GrayImage crop(const GrayImage& img, const CropBox& box);

// Corner-aligned bilinear resampling; outputs are rounded half-up into [0, 255].
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

}  // namespace drowsy
