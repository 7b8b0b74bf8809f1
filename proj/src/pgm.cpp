#include "drowsy/pgm.hpp"

#include <cstring>
#include <fstream>
#include <string>

namespace drowsy {
namespace {

struct ByteCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  bool done() const { return pos >= bytes.size(); }
  std::uint8_t peek() const { return bytes[pos]; }
};

bool is_pgm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

void skip_space_and_comments(ByteCursor& cur) {
  while (!cur.done()) {
    if (is_pgm_space(cur.peek())) {
      ++cur.pos;
    } else if (cur.peek() == '#') {
      while (!cur.done() && cur.peek() != '\n') ++cur.pos;
    } else {
      return;
    }
  }
}

std::uint64_t read_header_uint(ByteCursor& cur, const char* what) {
  skip_space_and_comments(cur);
  const std::size_t start = cur.pos;
  std::uint64_t value = 0;
  while (!cur.done() && cur.peek() >= '0' && cur.peek() <= '9') {
    value = value * 10 + (cur.peek() - '0');
    if (value > 0xFFFFFFFFull)
      throw ParseError(std::string("PGM: ") + what + " out of range at byte offset " +
                           std::to_string(start),
                       start);
    ++cur.pos;
  }
  if (cur.pos == start)
    throw ParseError(std::string("PGM: expected ") + what + " at byte offset " +
                         std::to_string(start),
                     start);
  return value;
}

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    std::string found = bytes.size() >= 2
                            ? std::string(1, static_cast<char>(bytes[0])) +
                                  static_cast<char>(bytes[1])
                            : std::string("<eof>");
    throw ParseError("PGM: bad magic \"" + found + "\" at byte offset 0, expected \"P5\"", 0);
  }

  ByteCursor cur{bytes, 2};
  const std::uint64_t width = read_header_uint(cur, "width");
  const std::uint64_t height = read_header_uint(cur, "height");
  const std::size_t maxval_at = cur.pos;
  const std::uint64_t maxval = read_header_uint(cur, "maxval");

  if (width < 1 || height < 1)
    throw ParseError("PGM: zero image dimension in header", maxval_at);
  if (maxval != 255)
    throw ParseError("PGM: unsupported maxval " + std::to_string(maxval) +
                         " at byte offset " + std::to_string(maxval_at) + ", expected 255",
                     maxval_at);

  // Exactly one whitespace byte separates the header from the raster.
  if (cur.done() || !is_pgm_space(cur.peek()))
    throw ParseError("PGM: missing whitespace before pixel data at byte offset " +
                         std::to_string(cur.pos),
                     cur.pos);
  ++cur.pos;

  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t have = bytes.size() - cur.pos;
  if (have < need)
    throw ParseError("PGM: truncated pixel data at byte offset " + std::to_string(cur.pos) +
                         ": need " + std::to_string(need) + " bytes, have " +
                         std::to_string(have),
                     cur.pos);

  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  std::memcpy(img.data.data(), bytes.data() + cur.pos, need);
  return img;
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
  if (!img.valid()) throw std::invalid_argument("write_pgm: invalid GrayImage");
  const std::string header = "P5\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + img.data.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return read_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.position());
  }
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
  const std::vector<std::uint8_t> bytes = write_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace drowsy
