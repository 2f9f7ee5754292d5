#include "poseref/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace poseref {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  return in;
}

// Skips whitespace/comments in a PNM header and reads one token.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

}  // namespace

void save_depth_pgm16(const DepthImage& depth, const std::string& path) {
  auto out = open_out(path);
  out << "P5\n" << depth.width << " " << depth.height << "\n65535\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(depth.width) * 2);
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const double mm = std::round(static_cast<double>(depth.at(c, r)) * 1000.0);
      const std::uint16_t v = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
      row[2 * c] = static_cast<unsigned char>(v >> 8);  // PGM is big-endian
      row[2 * c + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail(path, "write failed");
}

DepthImage load_depth_pgm16(const std::string& path) {
  auto in = open_in(path);
  if (pnm_token(in) != "P5") fail(path, "not a binary PGM");
  const int width = std::stoi(pnm_token(in));
  const int height = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  if (maxval != 65535) fail(path, "expected 16-bit PGM");
  DepthImage depth(width, height);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 2);
  for (int r = 0; r < height; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) fail(path, "truncated PGM");
    for (int c = 0; c < width; ++c) {
      const std::uint16_t v = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
      depth.at(c, r) = static_cast<float>(v) / 1000.0f;
    }
  }
  return depth;
}

namespace {

void write_pfm(const std::string& path, const char* magic, int width, int height, int channels,
               const float* data) {
  auto out = open_out(path);
  out << magic << "\n" << width << " " << height << "\n-1.0\n";  // -1: little-endian
  // PFM stores rows bottom-to-top.
  const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
  for (int r = height - 1; r >= 0; --r) {
    out.write(reinterpret_cast<const char*>(data + static_cast<std::size_t>(r) * row_floats),
              static_cast<std::streamsize>(row_floats * sizeof(float)));
  }
  if (!out) fail(path, "write failed");
}

void read_pfm(const std::string& path, const char* magic, int& width, int& height, int channels,
              std::vector<float>& data) {
  auto in = open_in(path);
  if (pnm_token(in) != magic) fail(path, std::string("expected ") + magic + " PFM");
  width = std::stoi(pnm_token(in));
  height = std::stoi(pnm_token(in));
  const double scale = std::stod(pnm_token(in));
  if (scale >= 0.0) fail(path, "big-endian PFM not supported");
  data.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
  const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
  for (int r = height - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(data.data() + static_cast<std::size_t>(r) * row_floats),
            static_cast<std::streamsize>(row_floats * sizeof(float)));
    if (!in) fail(path, "truncated PFM");
  }
}

}  // namespace

void save_depth_pfm(const DepthImage& depth, const std::string& path) {
  write_pfm(path, "Pf", depth.width, depth.height, 1, depth.data.data());
}

DepthImage load_depth_pfm(const std::string& path) {
  DepthImage depth;
  read_pfm(path, "Pf", depth.width, depth.height, 1, depth.data);
  return depth;
}

void save_normals_pfm(const NormalImage& normals, const std::string& path) {
  write_pfm(path, "PF", normals.width, normals.height, 3, normals.data.data());
}

NormalImage load_normals_pfm(const std::string& path) {
  NormalImage normals;
  read_pfm(path, "PF", normals.width, normals.height, 3, normals.data);
  return normals;
}

namespace {

void put_u32be(std::vector<unsigned char>& buf, std::uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v >> 24));
  buf.push_back(static_cast<unsigned char>(v >> 16));
  buf.push_back(static_cast<unsigned char>(v >> 8));
  buf.push_back(static_cast<unsigned char>(v));
}

void write_chunk(std::ostream& out, const char type[4], const std::vector<unsigned char>& data) {
  std::vector<unsigned char> head;
  put_u32be(head, static_cast<std::uint32_t>(data.size()));
  out.write(reinterpret_cast<const char*>(head.data()), 4);
  std::vector<unsigned char> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  const std::uint32_t crc =
      static_cast<std::uint32_t>(crc32(0L, body.data(), static_cast<uInt>(body.size())));
  std::vector<unsigned char> tail;
  put_u32be(tail, crc);
  out.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void save_labels_png16(const LabelImage& labels, const std::string& path) {
  auto out = open_out(path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<unsigned char> ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(labels.width));
  put_u32be(ihdr, static_cast<std::uint32_t>(labels.height));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  write_chunk(out, "IHDR", ihdr);

  // Scanlines: filter byte 0 + big-endian 16-bit samples.
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(labels.height) * (1 + 2 * labels.width));
  for (int r = 0; r < labels.height; ++r) {
    raw.push_back(0);
    for (int c = 0; c < labels.width; ++c) {
      const std::uint16_t v = labels.at(c, r);
      raw.push_back(static_cast<unsigned char>(v >> 8));
      raw.push_back(static_cast<unsigned char>(v & 0xff));
    }
  }
  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(comp_size);
  if (compress2(compressed.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    fail(path, "deflate failed");
  }
  compressed.resize(comp_size);
  write_chunk(out, "IDAT", compressed);
  write_chunk(out, "IEND", {});
  if (!out) fail(path, "write failed");
}

LabelImage load_labels_png16(const std::string& path) {
  auto in = open_in(path);
  unsigned char sig[8];
  in.read(reinterpret_cast<char*>(sig), 8);
  static const unsigned char want[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (!in || std::memcmp(sig, want, 8) != 0) fail(path, "not a PNG");

  int width = 0, height = 0;
  std::vector<unsigned char> idat;
  while (in) {
    unsigned char head[8];
    in.read(reinterpret_cast<char*>(head), 8);
    if (!in) break;
    const std::uint32_t len = (head[0] << 24) | (head[1] << 16) | (head[2] << 8) | head[3];
    const std::string type(reinterpret_cast<char*>(head) + 4, 4);
    std::vector<unsigned char> data(len);
    in.read(reinterpret_cast<char*>(data.data()), len);
    in.ignore(4);  // crc
    if (type == "IHDR") {
      width = (data[0] << 24) | (data[1] << 16) | (data[2] << 8) | data[3];
      height = (data[4] << 24) | (data[5] << 16) | (data[6] << 8) | data[7];
      if (data[8] != 16 || data[9] != 0) fail(path, "expected 16-bit grayscale PNG");
      if (data[12] != 0) fail(path, "interlaced PNG not supported");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data.begin(), data.end());
    } else if (type == "IEND") {
      break;
    }
  }
  if (width <= 0 || height <= 0) fail(path, "missing IHDR");

  const std::size_t raw_size = static_cast<std::size_t>(height) * (1 + 2 * static_cast<std::size_t>(width));
  std::vector<unsigned char> raw(raw_size);
  uLongf dest = static_cast<uLongf>(raw_size);
  if (uncompress(raw.data(), &dest, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      dest != raw_size) {
    fail(path, "inflate failed");
  }

  LabelImage labels(width, height);
  std::size_t pos = 0;
  for (int r = 0; r < height; ++r) {
    if (raw[pos] != 0) fail(path, "unsupported PNG filter (writer uses filter 0)");
    ++pos;
    for (int c = 0; c < width; ++c) {
      labels.at(c, r) = static_cast<std::uint16_t>((raw[pos] << 8) | raw[pos + 1]);
      pos += 2;
    }
  }
  return labels;
}

}  // namespace poseref
