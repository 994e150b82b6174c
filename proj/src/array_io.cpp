// SPDX-License-Identifier: Apache-2.0
#include "forge/core/array_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

namespace forge {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  return f;
}

}  // namespace

void write_array_f32(const std::filesystem::path& path, const MatD& m) {
  auto f = open_out(path, true);
  f << "arr f32 " << m.rows() << " " << m.cols() << "\n";
  std::vector<float> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row[static_cast<std::size_t>(c)] = static_cast<float>(m(r, c));
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!f) throw IoError("short write: " + path.string());
}

void write_array_i32(const std::filesystem::path& path, const MatI& m) {
  auto f = open_out(path, true);
  f << "arr i32 " << m.rows() << " " << m.cols() << "\n";
  std::vector<std::int32_t> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(std::int32_t)));
  }
  if (!f) throw IoError("short write: " + path.string());
}

namespace {

struct ArrHeader {
  std::string dtype;
  Eigen::Index rows = 0, cols = 0;
};

ArrHeader read_header(std::ifstream& f, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(f, line)) throw IoError("missing array header: " + path.string());
  std::istringstream ss(line);
  std::string magic;
  ArrHeader h;
  ss >> magic >> h.dtype >> h.rows >> h.cols;
  if (magic != "arr" || h.rows < 0 || h.cols < 0)
    throw IoError("malformed array header in " + path.string() + ": '" + line + "'");
  return h;
}

}  // namespace

MatD read_array_f32(const std::filesystem::path& path) {
  auto f = open_in(path, true);
  const ArrHeader h = read_header(f, path);
  if (h.dtype != "f32") throw IoError("expected f32 array in " + path.string());
  MatD m(h.rows, h.cols);
  std::vector<float> row(static_cast<std::size_t>(h.cols));
  for (Eigen::Index r = 0; r < h.rows; ++r) {
    f.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!f) throw IoError("short read: " + path.string());
    for (Eigen::Index c = 0; c < h.cols; ++c)
      m(r, c) = static_cast<double>(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

MatI read_array_i32(const std::filesystem::path& path) {
  auto f = open_in(path, true);
  const ArrHeader h = read_header(f, path);
  if (h.dtype != "i32") throw IoError("expected i32 array in " + path.string());
  MatI m(h.rows, h.cols);
  std::vector<std::int32_t> row(static_cast<std::size_t>(h.cols));
  for (Eigen::Index r = 0; r < h.rows; ++r) {
    f.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(std::int32_t)));
    if (!f) throw IoError("short read: " + path.string());
    for (Eigen::Index c = 0; c < h.cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void Record::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

bool Record::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

const std::string& Record::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw IoError("record missing key: " + key);
}

std::string Record::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

std::vector<std::string> Record::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

void write_record(const std::filesystem::path& path, const Record& rec) {
  auto f = open_out(path, false);
  for (const auto& [k, v] : rec.entries) f << k << ": " << v << "\n";
  if (!f) throw IoError("short write: " + path.string());
}

Record read_record(const std::filesystem::path& path) {
  auto f = open_in(path, false);
  Record rec;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find(": ");
    if (pos == std::string::npos)
      throw IoError("malformed record line in " + path.string() + ": '" + line + "'");
    rec.add(line.substr(0, pos), line.substr(pos + 2));
  }
  return rec;
}

std::string read_text_file(const std::filesystem::path& path) {
  auto f = open_in(path, true);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto f = open_out(path, true);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("short write: " + path.string());
}

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  return fnv1a(bytes.data(), bytes.size());
}

namespace {

std::string png_chunk(const char type[4], const std::string& payload) {
  std::string chunk;
  chunk.push_back(static_cast<char>((payload.size() >> 24) & 0xff));
  chunk.push_back(static_cast<char>((payload.size() >> 16) & 0xff));
  chunk.push_back(static_cast<char>((payload.size() >> 8) & 0xff));
  chunk.push_back(static_cast<char>(payload.size() & 0xff));
  std::string body(type, 4);
  body += payload;
  const auto crc =
      crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  chunk += body;
  chunk.push_back(static_cast<char>((crc >> 24) & 0xff));
  chunk.push_back(static_cast<char>((crc >> 16) & 0xff));
  chunk.push_back(static_cast<char>((crc >> 8) & 0xff));
  chunk.push_back(static_cast<char>(crc & 0xff));
  return chunk;
}

}  // namespace

void write_png_gray(const std::filesystem::path& path, const MatD& img) {
  const auto h = static_cast<std::uint32_t>(img.rows());
  const auto w = static_cast<std::uint32_t>(img.cols());
  std::string raw;
  raw.reserve(static_cast<std::size_t>(h) * (w + 1));
  for (std::uint32_t y = 0; y < h; ++y) {
    raw.push_back('\0');  // filter type: none
    for (std::uint32_t x = 0; x < w; ++x) {
      double v = img(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x));
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      raw.push_back(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
    }
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string deflated(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(deflated.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                6) != Z_OK)
    throw IoError("png deflate failed: " + path.string());
  deflated.resize(bound);

  std::string ihdr;  // PNG integers are big-endian
  for (int shift = 24; shift >= 0; shift -= 8) ihdr.push_back(static_cast<char>((w >> shift) & 0xff));
  for (int shift = 24; shift >= 0; shift -= 8) ihdr.push_back(static_cast<char>((h >> shift) & 0xff));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // color type: grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  out += png_chunk("IHDR", ihdr);
  out += png_chunk("IDAT", deflated);
  out += png_chunk("IEND", "");
  write_text_file(path, out);
}

void write_png_panel(const std::filesystem::path& path, const std::vector<MatD>& imgs) {
  if (imgs.empty()) throw IoError("empty image panel: " + path.string());
  const Eigen::Index h = imgs.front().rows();
  Eigen::Index w = 0;
  for (const auto& im : imgs) {
    if (im.rows() != h) throw IoError("panel images must share height: " + path.string());
    w += im.cols() + 2;
  }
  MatD panel = MatD::Ones(h, w - 2);
  Eigen::Index x = 0;
  for (const auto& im : imgs) {
    panel.block(0, x, h, im.cols()) = im;
    x += im.cols() + 2;
  }
  write_png_gray(path, panel);
}

}  // namespace forge
