#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "drowsy/image.hpp"

namespace drowsy {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// 68 facial landmarks in the iBUG 300-W numbering (1-indexed externally):
// points 37-42 outline the right eye, 43-48 the left eye; 37/40 and 43/46
// are the horizontal eye corners.
struct LandmarkSet {
  std::int64_t frame_id = 0;
  std::array<Point, 68> points{};

  const Point& point(int one_based) const { return points[one_based - 1]; }
  Point& point(int one_based) { return points[one_based - 1]; }
};

enum class EyeSide { Right, Left };

const char* to_string(EyeSide side);

struct EyeBoxParams {
  double margin = 0.4;  // per-side padding as a fraction of the eye box width
  bool square = true;   // grow the short dimension to make the box square
};

struct EyeSelection {
  EyeSide side = EyeSide::Right;
  double span = 0.0;  // winning corner-to-corner distance, pixels
  CropBox box;
};

// Parses lines of "frame_id,x1,y1,...,x68,y68" (137 fields). An optional
// header line is skipped. Throws ParseError carrying the 1-based line number.
std::vector<LandmarkSet> parse_landmarks_csv(std::string_view text);

// Bounding box of the six landmarks of one eye, padded by params.margin per
// side, optionally squared about its center, then clamped to `frame` when
// given. Without a frame the box may extend past the image edges.
CropBox eye_box(const LandmarkSet& lm, EyeSide side, const EyeBoxParams& params = {},
                const std::optional<Extent>& frame = std::nullopt);

// Picks the eye facing the camera: the side whose corner distance
// (points 37-40 vs 43-46) is larger, right on ties.
EyeSelection select_eye(const LandmarkSet& lm, const EyeBoxParams& params = {},
                        const std::optional<Extent>& frame = std::nullopt);

}  // namespace drowsy
