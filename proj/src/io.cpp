#include "pupo/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace pupo::io {

namespace {

constexpr std::array<char, 8> kRealTag{'P', 'U', 'P', 'O', 'R', 'E', 'A', 'L'};
constexpr std::array<char, 8> kComplexTag{'P', 'U', 'P', 'O', 'C', 'P', 'L', 'X'};

std::ofstream open_out(fs::path const &path, std::ios::openmode mode = std::ios::out)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, mode);
  if (!out) {
    throw DataError("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(fs::path const &path, std::ios::openmode mode = std::ios::in)
{
  std::ifstream in(path, mode);
  if (!in) {
    throw DataError("cannot open: " + path.string());
  }
  return in;
}

Matrix get_plane(std::istream &in, std::size_t rows, std::size_t cols)
{
  return Matrix(rows, cols, get_f64s(in, rows * cols));
}

void put_header(std::ostream &out, std::array<char, 8> const &tag, std::size_t rows, std::size_t cols)
{
  if (rows > std::numeric_limits<std::uint32_t>::max() || cols > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("grid too large for file format");
  }
  out.write(tag.data(), tag.size());
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
}

std::pair<std::size_t, std::size_t> get_header(std::istream &in, std::array<char, 8> const &tag, fs::path const &path)
{
  std::array<char, 8> got{};
  in.read(got.data(), got.size());
  if (!in || got != tag) {
    throw DataError("bad magic tag in " + path.string());
  }
  auto const rows = get_u32(in);
  auto const cols = get_u32(in);
  if (!in || rows == 0 || cols == 0) {
    throw DataError("bad dimensions in " + path.string());
  }
  return {rows, cols};
}

std::istringstream header_line(std::istream &in, fs::path const &path)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty file: " + path.string());
  }
  return std::istringstream(line);
}

} // namespace

void put_u32(std::ostream &out, std::uint32_t v)
{
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) {
    b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream &in)
{
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char *>(b.data()), b.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  }
  return v;
}

void put_u64(std::ostream &out, std::uint64_t v)
{
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream &in)
{
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char *>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  }
  return v;
}

void put_f64s(std::ostream &out, std::span<double const> values)
{
  std::vector<char> buf(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto const bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int k = 0; k < 8; ++k) {
      buf[i * 8 + k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> get_f64s(std::istream &in, std::size_t count)
{
  std::vector<unsigned char> buf(count * 8);
  in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) {
    throw DataError("truncated binary data");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(buf[i * 8 + k]) << (8 * k);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

std::string format_double(double v)
{
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  std::array<char, 64> buf{};
  auto const res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string const &text)
{
  if (text == "inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (text == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  auto const *first = text.data();
  auto const *last = text.data() + text.size();
  if (first != last && *first == '+') {
    ++first;
  }
  auto const res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw DataError("not a number: '" + text + "'");
  }
  return v;
}

void write_mask(fs::path const &path, SamplingMask const &mask)
{
  auto out = open_out(path);
  char rate[32];
  std::snprintf(rate, sizeof(rate), "%.6f", rate_of(mask));
  out << "mask " << mask.rows() << ' ' << mask.cols() << ' ' << rate << '\n';
  std::string line(mask.cols(), '0');
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      line[c] = mask(r, c) ? '1' : '0';
    }
    out << line << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

SamplingMask read_mask(fs::path const &path)
{
  auto in = open_in(path);
  auto header = header_line(in, path);
  std::string tag;
  std::size_t rows = 0, cols = 0;
  double rate = 0.0;
  if (!(header >> tag >> rows >> cols >> rate) || tag != "mask" || rows == 0 || cols == 0) {
    throw DataError("bad mask header in " + path.string());
  }
  std::vector<std::uint8_t> bits(rows * cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line) || line.size() != cols) {
      throw DataError("truncated mask file " + path.string());
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (line[c] != '0' && line[c] != '1') {
        throw DataError("mask entries must be '0' or '1' in " + path.string());
      }
      bits[r * cols + c] = line[c] == '1' ? 1 : 0;
    }
  }
  return SamplingMask(rows, cols, std::move(bits));
}

void write_probability(fs::path const &path, ProbabilityMatrix const &p)
{
  auto out = open_out(path);
  out << "prob " << p.rows() << ' ' << p.cols() << '\n';
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", p(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

ProbabilityMatrix read_probability(fs::path const &path)
{
  auto in = open_in(path);
  auto header = header_line(in, path);
  std::string tag;
  std::size_t rows = 0, cols = 0;
  if (!(header >> tag >> rows >> cols) || tag != "prob" || rows == 0 || cols == 0) {
    throw DataError("bad probability header in " + path.string());
  }
  std::vector<double> values(rows * cols);
  std::string token;
  for (auto &v : values) {
    if (!(in >> token)) {
      throw DataError("truncated probability file " + path.string());
    }
    v = parse_double(token);
  }
  return ProbabilityMatrix(Matrix(rows, cols, std::move(values)));
}

void write_matrix(fs::path const &path, Matrix const &m)
{
  auto out = open_out(path, std::ios::out | std::ios::binary);
  put_header(out, kRealTag, m.rows(), m.cols());
  put_f64s(out, m.values());
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

Matrix read_matrix(fs::path const &path)
{
  auto in = open_in(path, std::ios::in | std::ios::binary);
  auto const [rows, cols] = get_header(in, kRealTag, path);
  return get_plane(in, rows, cols);
}

void write_image(fs::path const &path, RealImage const &image)
{
  write_matrix(path, image.pixels());
}

RealImage read_image(fs::path const &path)
{
  return RealImage(read_matrix(path));
}

void write_complex(fs::path const &path, ComplexGrid const &grid)
{
  auto out = open_out(path, std::ios::out | std::ios::binary);
  put_header(out, kComplexTag, grid.rows(), grid.cols());
  put_f64s(out, grid.real().values());
  put_f64s(out, grid.imag().values());
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

ComplexGrid read_complex(fs::path const &path)
{
  auto in = open_in(path, std::ios::in | std::ios::binary);
  auto const [rows, cols] = get_header(in, kComplexTag, path);
  auto re = get_plane(in, rows, cols);
  auto im = get_plane(in, rows, cols);
  return ComplexGrid(std::move(re), std::move(im));
}

bool is_complex_file(fs::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  std::array<char, 8> got{};
  in.read(got.data(), got.size());
  return in && got == kComplexTag;
}

void write_pgm(fs::path const &path, Matrix const &pixels)
{
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  std::vector<char> buf(pixels.size());
  auto const v = pixels.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double const x = std::clamp(v[i], 0.0, 1.0);
    buf[i] = static_cast<char>(static_cast<unsigned char>(std::lround(x * 255.0)));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_pgm(fs::path const &path, SamplingMask const &mask)
{
  Matrix m(mask.rows(), mask.cols());
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      m(r, c) = mask(r, c) ? 1.0 : 0.0;
    }
  }
  write_pgm(path, m);
}

Matrix read_pgm(fs::path const &path)
{
  auto in = open_in(path, std::ios::in | std::ios::binary);
  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw DataError("truncated PGM header in " + path.string());
  };
  std::string const magic = next_token();
  if (magic != "P5" && magic != "P2") {
    throw DataError("not a PGM file: " + path.string());
  }
  std::size_t const cols = std::stoul(next_token());
  std::size_t const rows = std::stoul(next_token());
  double const maxval = std::stod(next_token());
  if (rows == 0 || cols == 0 || maxval <= 0 || maxval > 65535) {
    throw DataError("bad PGM header in " + path.string());
  }
  Matrix m(rows, cols);
  auto v = m.values();
  if (magic == "P2") {
    for (auto &x : v) {
      x = std::stod(next_token()) / maxval;
    }
    return m;
  }
  in.get(); // single whitespace after maxval
  std::size_t const bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(v.size() * bytes);
  in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) {
    throw DataError("truncated PGM data in " + path.string());
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    double const raw = bytes == 2 ? static_cast<double>((buf[2 * i] << 8) | buf[2 * i + 1]) : buf[i];
    v[i] = raw / maxval;
  }
  return m;
}

} // namespace pupo::io
