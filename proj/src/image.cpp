#include "drowsy/image.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace drowsy {

CropBox CropBox::clamped(Extent frame) const {
  const int nx0 = std::max(x0, 0);
  const int ny0 = std::max(y0, 0);
  const int nx1 = std::min(x0 + w, frame.width);
  const int ny1 = std::min(y0 + h, frame.height);
  return {nx0, ny0, nx1 - nx0, ny1 - ny0};
}

GrayImage to_grayscale(const RgbImage& img) {
  if (!img.valid()) throw std::invalid_argument("to_grayscale: invalid RgbImage");
  GrayImage out(img.width, img.height);
  const std::size_t n = out.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = &img.data[3 * i];
    const double luma = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    out.data[i] = clamp_round_u8(luma);
  }
  return out;
}

GrayImage equalize_histogram(const GrayImage& img) {
  if (!img.valid()) throw std::invalid_argument("equalize_histogram: invalid GrayImage");

  std::array<std::size_t, 256> cdf{};
  for (std::uint8_t v : img.data) ++cdf[v];
  for (int v = 1; v < 256; ++v) cdf[v] += cdf[v - 1];

  const std::size_t n = img.data.size();
  std::size_t cdf_min = 0;
  for (int v = 0; v < 256; ++v) {
    if (cdf[v] > 0) {
      cdf_min = cdf[v];
      break;
    }
  }
  if (cdf_min == n) return img;  // constant image

  // out(v) = round((cdf(v) - cdf_min) / (n - cdf_min) * 255)
  std::array<std::uint8_t, 256> lut{};
  const double denom = static_cast<double>(n - cdf_min);
  for (int v = 0; v < 256; ++v) {
    const double num = static_cast<double>(cdf[v]) - static_cast<double>(cdf_min);
    lut[v] = clamp_round_u8(num / denom * 255.0);
  }

  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < n; ++i) out.data[i] = lut[img.data[i]];
  return out;
}

GrayImage crop(const GrayImage& img, const CropBox& box) {
  if (!img.valid()) throw std::invalid_argument("crop: invalid GrayImage");
  if (box.empty()) throw DataError("crop: invalid ROI, box has zero area");
  if (box.x0 < 0 || box.y0 < 0 || box.x0 + box.w > img.width ||
      box.y0 + box.h > img.height) {
    throw DataError("crop: box (" + std::to_string(box.x0) + "," +
                    std::to_string(box.y0) + "," + std::to_string(box.w) + "," +
                    std::to_string(box.h) + ") exceeds image " +
                    std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  GrayImage out(box.w, box.h);
  for (int j = 0; j < box.h; ++j) {
    const std::uint8_t* src = &img.data[static_cast<std::size_t>(box.y0 + j) * img.width + box.x0];
    std::copy(src, src + box.w, &out.data[static_cast<std::size_t>(j) * box.w]);
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (!img.valid()) throw std::invalid_argument("resize_bilinear: invalid GrayImage");
  if (out_w < 1 || out_h < 1)
    throw std::invalid_argument("resize_bilinear: output dimensions must be >= 1");

  GrayImage out(out_w, out_h);
  const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
  const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;

  for (int y = 0; y < out_h; ++y) {
    const double fy = y * sy;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = x * sx;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
      const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
      out.at(x, y) = clamp_round_u8((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

}  // namespace drowsy
