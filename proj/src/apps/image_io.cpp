#include "breg/apps/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "breg/errors.hpp"

namespace breg::apps {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

int parse_header_int(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in " + path);
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5") throw IoError("not a P2/P5 PGM file: " + path);
  const int width = parse_header_int(in, path);
  const int height = parse_header_int(in, path);
  GrayImage img;
  img.maxval = parse_header_int(in, path);
  if (img.maxval > 65535) throw IoError("PGM maxval above 65535 in " + path);
  img.pixels.resize(height, width);

  if (magic == "P2") {
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        long v;
        if (!(in >> v) || v < 0 || v > img.maxval) throw IoError("bad pixel value in " + path);
        img.pixels(i, j) = static_cast<double>(v);
      }
    }
    return img;
  }

  const int bytes = img.maxval < 256 ? 1 : 2;
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated PGM data in " + path);
  std::size_t pos = 0;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      unsigned v = buf[pos++];
      if (bytes == 2) v = (v << 8) | buf[pos++];
      if (v > static_cast<unsigned>(img.maxval)) throw IoError("pixel above maxval in " + path);
      img.pixels(i, j) = static_cast<double>(v);
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Matrix& pixels, double peak, int maxval, bool ascii) {
  if (maxval != 255 && maxval != 65535) throw UsageError("PGM maxval must be 255 or 65535");
  if (!(peak > 0)) throw UsageError("peak must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << (ascii ? "P2" : "P5") << '\n' << pixels.cols() << ' ' << pixels.rows() << '\n' << maxval << '\n';
  for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
    for (Eigen::Index j = 0; j < pixels.cols(); ++j) {
      const double scaled = std::round(pixels(i, j) / peak * maxval);
      const unsigned v = static_cast<unsigned>(std::clamp(std::isfinite(scaled) ? scaled : 0.0, 0.0,
                                                          static_cast<double>(maxval)));
      if (ascii) {
        out << v << (j + 1 == pixels.cols() ? '\n' : ' ');
      } else if (maxval == 255) {
        out.put(static_cast<char>(v));
      } else {
        out.put(static_cast<char>(v >> 8));
        out.put(static_cast<char>(v & 0xFF));
      }
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing CSV header in " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split_csv(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("bad");
      } catch (const std::exception&) {
        throw IoError("malformed CSV value '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV matrix without rows in " + path);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << 'c' << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace breg::apps
