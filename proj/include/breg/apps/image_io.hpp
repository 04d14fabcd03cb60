#pragma once

#include <string>

#include "breg/types.hpp"

namespace breg::apps {

struct GrayImage {
  /// Row i of the matrix is image row i; values in [0, maxval].
  Matrix pixels;
  int maxval = 255;
};

/// Reads P2 (ASCII) or P5 (binary, 8 or 16 bit big-endian) PGM files.
/// Throws IoError on unreadable or malformed input.
GrayImage read_pgm(const std::string& path);

/// Writes `pixels` scaled so that `peak` maps to maxval (255 or 65535),
/// rounded and clipped. Binary P5 unless `ascii`. Throws IoError.
void write_pgm(const std::string& path, const Matrix& pixels, double peak, int maxval = 255,
               bool ascii = false);

/// CSV matrix: one header line, then one comma-separated row per matrix row.
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m);

}  // namespace breg::apps
