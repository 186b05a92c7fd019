#include "gazekit/raster_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace gazekit::io {
namespace {

using Loc = ParseError::Location;

std::uint32_t read_u32_le(std::istream& in, const std::string& source, std::uint64_t offset,
                          const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ParseError(source, Loc::kByteOffset, offset, std::string("truncated ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), Loc::kNone, 0, "cannot open file");
  return in;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::string& source) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) {
    throw ParseError(source, Loc::kByteOffset, 0, "truncated PGM header");
  }
  return tok;
}

int parse_header_int(const std::string& tok, const std::string& source, const char* field) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > std::numeric_limits<int>::max()) throw std::out_of_range(field);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError(source, Loc::kNone, 0, std::string("invalid PGM ") + field + " '" + tok + "'");
  }
}

}  // namespace

Raster read_gpdm(std::istream& in, const std::string& source) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string(magic.data(), 4) != "GPDM") {
    throw ParseError(source, Loc::kByteOffset, 0, "missing GPDM magic bytes");
  }
  const std::uint32_t w = read_u32_le(in, source, 4, "width");
  const std::uint32_t h = read_u32_le(in, source, 8, "height");
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
    throw ParseError(source, Loc::kByteOffset, 4,
                     "implausible raster size " + std::to_string(w) + "x" + std::to_string(h));
  }
  Raster r;
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  r.values.resize(n);
  std::vector<unsigned char> buf(n * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != buf.size()) {
    throw ParseError(source, Loc::kByteOffset, 12 + got,
                     "truncated pixel data: expected " + std::to_string(buf.size()) + " bytes, got " +
                         std::to_string(got));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(buf[4 * i]) |
                               (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    r.values[i] = std::bit_cast<float>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(source, Loc::kByteOffset, 12 + buf.size(), "trailing bytes after pixel data");
  }
  return r;
}

Raster read_gpdm(const std::filesystem::path& path) {
  auto in = open_binary(path);
  return read_gpdm(in, path.string());
}

void write_gpdm(std::ostream& out, int width, int height, std::span<const double> values) {
  if (width < 1 || height < 1 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidInput("raster value count does not match width x height");
  }
  out.write("GPDM", 4);
  put_u32_le(out, static_cast<std::uint32_t>(width));
  put_u32_le(out, static_cast<std::uint32_t>(height));
  for (double v : values) put_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void write_gpdm(const std::filesystem::path& path, int width, int height,
                std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_gpdm(out, width, height, values);
}

Raster read_pgm16(std::istream& in, double scale_m_per_unit, const std::string& source) {
  if (!(scale_m_per_unit > 0.0)) {
    throw InvalidInput("scale_m_per_unit must be positive for PGM depth");
  }
  if (pgm_token(in, source) != "P5") {
    throw ParseError(source, Loc::kByteOffset, 0, "not a binary PGM (expected P5)");
  }
  const int w = parse_header_int(pgm_token(in, source), source, "width");
  const int h = parse_header_int(pgm_token(in, source), source, "height");
  const int maxval = parse_header_int(pgm_token(in, source), source, "maxval");
  if (maxval <= 255 || maxval > 65535) {
    throw ParseError(source, Loc::kNone, 0, "PGM depth must be 16-bit (maxval > 255)");
  }
  const auto data_offset = static_cast<std::uint64_t>(in.tellg());
  Raster r;
  r.width = w;
  r.height = h;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<unsigned char> buf(2 * n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != buf.size()) {
    throw ParseError(source, Loc::kByteOffset, data_offset + got, "truncated PGM pixel data");
  }
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
    r.values[i] = v == 0 ? std::numeric_limits<float>::quiet_NaN()
                         : static_cast<float>(v * scale_m_per_unit);
  }
  return r;
}

void write_pgm8(const std::filesystem::path& path, int width, int height,
                std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  for (double v : values) {
    const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
}

IntrinsicsSidecar parse_intrinsics_sidecar(const std::string& json_text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, Loc::kByteOffset, e.byte, "invalid JSON");
  }
  if (!j.is_object()) throw ParseError(source, Loc::kNone, 0, "sidecar must be a JSON object");
  auto require_number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ParseError(source, Loc::kNone, 0, std::string("field '") + key + "' must be a number");
    }
    return j[key].get<double>();
  };
  auto require_int = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw ParseError(source, Loc::kNone, 0, std::string("field '") + key + "' must be an integer");
    }
    return j[key].get<int>();
  };
  IntrinsicsSidecar s;
  s.intrinsics.focal_px = require_number("focal_px");
  s.intrinsics.width = require_int("width");
  s.intrinsics.height = require_int("height");
  s.intrinsics.principal_x = s.intrinsics.width / 2.0;
  s.intrinsics.principal_y = s.intrinsics.height / 2.0;
  if (j.contains("principal")) {
    const auto& p = j["principal"];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(source, Loc::kNone, 0, "field 'principal' must be [x, y]");
    }
    s.intrinsics.principal_x = p[0].get<double>();
    s.intrinsics.principal_y = p[1].get<double>();
  }
  if (j.contains("scale_m_per_unit")) s.scale_m_per_unit = require_number("scale_m_per_unit");
  try {
    s.intrinsics.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(source, Loc::kNone, 0, e.what());
  }
  return s;
}

IntrinsicsSidecar read_intrinsics_sidecar(const std::filesystem::path& path) {
  return parse_intrinsics_sidecar(read_text_file(path), path.string());
}

DepthMap to_depth_map(const Raster& raster) {
  std::vector<double> v(raster.values.begin(), raster.values.end());
  return DepthMap(raster.width, raster.height, std::move(v));
}

DepthMap load_depth(const std::filesystem::path& path, std::optional<double> scale_m_per_unit) {
  auto in = open_binary(path);
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  in.clear();
  in.seekg(0);
  if (std::string(magic.data(), 4) == "GPDM") return to_depth_map(read_gpdm(in, path.string()));
  if (magic[0] == 'P' && magic[1] == '5') {
    if (!scale_m_per_unit) {
      throw ConfigError(path.string() + ": 16-bit PGM depth requires scale_m_per_unit in the sidecar");
    }
    return to_depth_map(read_pgm16(in, *scale_m_per_unit, path.string()));
  }
  throw ParseError(path.string(), Loc::kByteOffset, 0, "unrecognised depth format");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gazekit::io
