#include "drowsy/landmarks.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "drowsy/errors.hpp"

namespace drowsy {
namespace {

constexpr int kFieldsPerLine = 137;  // frame_id + 68 (x, y) pairs

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !s.empty();
}

bool parse_f64(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !s.empty();
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& detail) {
  throw ParseError("landmarks CSV line " + std::to_string(line_no) + ": " + detail,
                   line_no);
}

}  // namespace

const char* to_string(EyeSide side) {
  return side == EyeSide::Right ? "right" : "left";
}

std::vector<LandmarkSet> parse_landmarks_csv(std::string_view text) {
  std::vector<LandmarkSet> result;
  std::size_t line_no = 0;
  bool header_allowed = true;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = eol == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> fields = split_fields(line);

    std::int64_t frame_id = 0;
    if (!parse_i64(trim(fields[0]), frame_id)) {
      // A leading non-numeric first field is the optional header line.
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      line_error(line_no, "frame id is not a non-negative integer: \"" +
                              std::string(trim(fields[0])) + "\"");
    }
    header_allowed = false;

    if (fields.size() != kFieldsPerLine)
      line_error(line_no, "expected " + std::to_string(kFieldsPerLine) +
                              " fields, got " + std::to_string(fields.size()));
    if (frame_id < 0)
      line_error(line_no, "frame id must be non-negative, got " + std::to_string(frame_id));

    LandmarkSet lm;
    lm.frame_id = frame_id;
    for (int i = 0; i < 68; ++i) {
      double x = 0.0;
      double y = 0.0;
      const std::string_view fx = trim(fields[1 + 2 * i]);
      const std::string_view fy = trim(fields[2 + 2 * i]);
      if (!parse_f64(fx, x))
        line_error(line_no, "field " + std::to_string(2 + 2 * i) + " is not numeric: \"" +
                                std::string(fx) + "\"");
      if (!parse_f64(fy, y))
        line_error(line_no, "field " + std::to_string(3 + 2 * i) + " is not numeric: \"" +
                                std::string(fy) + "\"");
      if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0)
        line_error(line_no, "coordinate " + std::to_string(i + 1) +
                                " must be finite and non-negative");
      lm.points[i] = {x, y};
    }
    result.push_back(lm);
  }
  return result;
}

CropBox eye_box(const LandmarkSet& lm, EyeSide side, const EyeBoxParams& params,
                const std::optional<Extent>& frame) {
  if (params.margin < 0.0)
    throw std::invalid_argument("eye_box: margin must be non-negative");

  const int first = side == EyeSide::Right ? 37 : 43;  // 1-based, 6 points per eye
  double xmin = lm.point(first).x, xmax = xmin;
  double ymin = lm.point(first).y, ymax = ymin;
  for (int i = first; i < first + 6; ++i) {
    const Point& p = lm.point(i);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }

  const double w = xmax - xmin;
  if (w <= 0.0)
    throw DataError("eye_box: degenerate " + std::string(to_string(side)) +
                    "-eye landmarks (zero-width cluster)");

  const double m = params.margin * w;
  double x0 = xmin - m, x1 = xmax + m;
  double y0 = ymin - m, y1 = ymax + m;

  if (params.square) {
    const double side_len = std::max(x1 - x0, y1 - y0);
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * side_len;
    x1 = cx + 0.5 * side_len;
    y0 = cy - 0.5 * side_len;
    y1 = cy + 0.5 * side_len;
  }

  const int ix0 = static_cast<int>(std::floor(x0));
  const int iy0 = static_cast<int>(std::floor(y0));
  const int ix1 = static_cast<int>(std::ceil(x1));
  const int iy1 = static_cast<int>(std::ceil(y1));
  CropBox box{ix0, iy0, std::max(ix1 - ix0, 1), std::max(iy1 - iy0, 1)};

  if (frame) {
    box = box.clamped(*frame);
    if (box.empty())
      throw DataError("eye_box: ROI falls outside the frame");
  }
  return box;
}

EyeSelection select_eye(const LandmarkSet& lm, const EyeBoxParams& params,
                        const std::optional<Extent>& frame) {
  const double d_right = std::hypot(lm.point(37).x - lm.point(40).x,
                                    lm.point(37).y - lm.point(40).y);
  const double d_left = std::hypot(lm.point(43).x - lm.point(46).x,
                                   lm.point(43).y - lm.point(46).y);
  if (d_right == 0.0 && d_left == 0.0)
    throw DataError("select_eye: degenerate landmarks, both eye spans are zero");

  const EyeSide side = d_right >= d_left ? EyeSide::Right : EyeSide::Left;
  const double span = side == EyeSide::Right ? d_right : d_left;
  return {side, span, eye_box(lm, side, params, frame)};
}

}  // namespace drowsy
