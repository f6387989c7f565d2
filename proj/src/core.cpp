#include "pupo/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pupo {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
  : rows_{rows}
  , cols_{cols}
  , data_(rows * cols, fill)
{
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
  : rows_{rows}
  , cols_{cols}
  , data_{std::move(values)}
{
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: value count does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

bool Matrix::all_finite() const noexcept
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::sum() const noexcept
{
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

double Matrix::max() const noexcept
{
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double Matrix::min() const noexcept
{
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

void require_same_shape(Matrix const &a, Matrix const &b, char const *what)
{
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

namespace {

void require_positive(Matrix const &m, char const *what)
{
  if (m.rows() == 0 || m.cols() == 0) {
    throw ShapeError(std::string(what) + ": dimensions must be positive");
  }
}

void require_finite(Matrix const &m, char const *what)
{
  if (!m.all_finite()) {
    throw DataError(std::string(what) + ": non-finite entry");
  }
}

} // namespace

ComplexGrid::ComplexGrid(Matrix real, Matrix imag)
  : real_{std::move(real)}
  , imag_{std::move(imag)}
{
  require_positive(real_, "ComplexGrid");
  require_same_shape(real_, imag_, "ComplexGrid");
  require_finite(real_, "ComplexGrid");
  require_finite(imag_, "ComplexGrid");
}

ComplexGrid ComplexGrid::zeros(std::size_t rows, std::size_t cols)
{
  return ComplexGrid(Matrix(rows, cols), Matrix(rows, cols));
}

ComplexGrid ComplexGrid::from_real(Matrix real)
{
  Matrix imag(real.rows(), real.cols());
  return ComplexGrid(std::move(real), std::move(imag));
}

TwoChannelGrid::TwoChannelGrid(Matrix channel0, Matrix channel1)
  : channel0_{std::move(channel0)}
  , channel1_{std::move(channel1)}
{
  require_positive(channel0_, "TwoChannelGrid");
  require_same_shape(channel0_, channel1_, "TwoChannelGrid");
  require_finite(channel0_, "TwoChannelGrid");
  require_finite(channel1_, "TwoChannelGrid");
}

RealImage::RealImage(Matrix pixels)
  : pixels_{std::move(pixels)}
{
  require_positive(pixels_, "RealImage");
  require_finite(pixels_, "RealImage");
}

bool RealImage::in_unit_range() const noexcept
{
  auto const v = pixels_.values();
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
}

SamplingMask::SamplingMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
  : rows_{rows}
  , cols_{cols}
  , bits_{std::move(bits)}
{
  if (rows == 0 || cols == 0) {
    throw ShapeError("SamplingMask: dimensions must be positive");
  }
  if (bits_.size() != rows * cols) {
    throw ShapeError("SamplingMask: bit count does not match dimensions");
  }
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw DataError("SamplingMask: entries must be 0 or 1");
  }
}

SamplingMask SamplingMask::filled(std::size_t rows, std::size_t cols, bool value)
{
  return SamplingMask(rows, cols, std::vector<std::uint8_t>(rows * cols, value ? 1 : 0));
}

std::size_t SamplingMask::count() const noexcept
{
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

ProbabilityMatrix::ProbabilityMatrix(Matrix probs)
  : probs_{std::move(probs)}
{
  require_positive(probs_, "ProbabilityMatrix");
  require_finite(probs_, "ProbabilityMatrix");
  auto const v = probs_.values();
  if (std::any_of(v.begin(), v.end(), [](double p) { return p < 0.0 || p > 1.0; })) {
    throw DataError("ProbabilityMatrix: entries must lie in [0, 1]");
  }
}

ProbabilityMatrix ProbabilityMatrix::uniform(std::size_t rows, std::size_t cols, double p)
{
  return ProbabilityMatrix(Matrix(rows, cols, p));
}

double ProbabilityMatrix::mean() const noexcept
{
  return probs_.sum() / static_cast<double>(probs_.size());
}

double rate_of(SamplingMask const &mask)
{
  return static_cast<double>(mask.count()) / static_cast<double>(mask.rows() * mask.cols());
}

Matrix magnitude(ComplexGrid const &grid)
{
  Matrix out(grid.rows(), grid.cols());
  auto const re = grid.real().values();
  auto const im = grid.imag().values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::hypot(re[i], im[i]);
  }
  return out;
}

RealImage hermitian_symmetrize_display(ComplexGrid const &grid)
{
  Matrix out = magnitude(grid);
  auto v = out.values();
  for (double &x : v) {
    x = std::log1p(x);
  }
  double const peak = out.max();
  if (peak > 0.0) {
    for (double &x : v) {
      x /= peak;
    }
  }
  return RealImage(std::move(out));
}

} // namespace pupo
