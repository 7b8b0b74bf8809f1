#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "drowsy/image.hpp"

namespace drowsy {

// Binary PGM (magic "P5", maxval 255). Header comments ('#' to end of line)
// are accepted on read. write_pgm/read_pgm round-trip bit-exactly.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

}  // namespace drowsy
