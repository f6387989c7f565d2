#pragma once

#include "pupo/core.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pupo::io {

namespace fs = std::filesystem;

// Mask text file: "mask m n rate" then m lines of n '0'/'1' characters.
void write_mask(fs::path const &path, SamplingMask const &mask);
SamplingMask read_mask(fs::path const &path);

// Probability text file: "prob m n" then m lines of n decimals. Values are
// written with 17 significant digits so a reload is bit-exact.
void write_probability(fs::path const &path, ProbabilityMatrix const &p);
ProbabilityMatrix read_probability(fs::path const &path);

// Binary little-endian grids: 8-byte magic tag, uint32 rows, uint32 cols, then
// row-major float64 planes (one for real data, two for complex).
void write_matrix(fs::path const &path, Matrix const &m);
Matrix read_matrix(fs::path const &path);
void write_image(fs::path const &path, RealImage const &image);
RealImage read_image(fs::path const &path);
void write_complex(fs::path const &path, ComplexGrid const &grid);
ComplexGrid read_complex(fs::path const &path);

/// True when the file starts with the complex-grid magic tag.
bool is_complex_file(fs::path const &path);

// 8-bit binary PGM previews. Values are clamped to [0,1] before quantization.
void write_pgm(fs::path const &path, Matrix const &pixels);
void write_pgm(fs::path const &path, SamplingMask const &mask);
/// Reads P2/P5 PGM (8 or 16 bit) as raw intensities scaled by maxval.
Matrix read_pgm(fs::path const &path);

// Little-endian primitives shared by the binary formats.
void put_u32(std::ostream &out, std::uint32_t v);
std::uint32_t get_u32(std::istream &in);
void put_u64(std::ostream &out, std::uint64_t v);
std::uint64_t get_u64(std::istream &in);
void put_f64s(std::ostream &out, std::span<double const> values);
std::vector<double> get_f64s(std::istream &in, std::size_t count);

/// Shortest decimal that round-trips the double ("inf"/"-inf" for infinities).
std::string format_double(double v);
/// Inverse of format_double; accepts "inf".
double parse_double(std::string const &text);

} // namespace pupo::io
