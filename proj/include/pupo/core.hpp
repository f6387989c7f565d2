#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pupo {

/// Dimension mismatch between grids that must agree.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or missing input data (files, manifests, non-finite samples).
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Training diverged or a numerical routine produced non-finite values.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. The building block for every grid type.
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  double *row(std::size_t r) noexcept { return data_.data() + r * cols_; }
  double const *row(std::size_t r) const noexcept { return data_.data() + r * cols_; }

  std::span<double> values() noexcept { return data_; }
  std::span<double const> values() const noexcept { return data_; }

  bool same_shape(Matrix const &other) const noexcept
  {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;
  double sum() const noexcept;
  double max() const noexcept;
  double min() const noexcept;

  friend bool operator==(Matrix const &, Matrix const &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

void require_same_shape(Matrix const &a, Matrix const &b, char const *what);

/// m x n complex k-space (or complex image) stored as separate real and imaginary planes.
class ComplexGrid
{
public:
  ComplexGrid(Matrix real, Matrix imag);
  static ComplexGrid zeros(std::size_t rows, std::size_t cols);
  static ComplexGrid from_real(Matrix real);

  std::size_t rows() const noexcept { return real_.rows(); }
  std::size_t cols() const noexcept { return real_.cols(); }
  Matrix const &real() const noexcept { return real_; }
  Matrix const &imag() const noexcept { return imag_; }

  friend bool operator==(ComplexGrid const &, ComplexGrid const &) = default;

private:
  Matrix real_;
  Matrix imag_;
};

/// The network-facing view of complex data: channel0 = real part, channel1 = imaginary part.
class TwoChannelGrid
{
public:
  TwoChannelGrid(Matrix channel0, Matrix channel1);

  std::size_t rows() const noexcept { return channel0_.rows(); }
  std::size_t cols() const noexcept { return channel0_.cols(); }
  Matrix const &channel0() const noexcept { return channel0_; }
  Matrix const &channel1() const noexcept { return channel1_; }

  friend bool operator==(TwoChannelGrid const &, TwoChannelGrid const &) = default;

private:
  Matrix channel0_;
  Matrix channel1_;
};

/// Real single-channel image. The [0,1] range is a property of ingested data only;
/// network activations and residuals may leave it.
class RealImage
{
public:
  RealImage() = default;
  explicit RealImage(Matrix pixels);

  std::size_t rows() const noexcept { return pixels_.rows(); }
  std::size_t cols() const noexcept { return pixels_.cols(); }
  Matrix const &pixels() const noexcept { return pixels_; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return pixels_(r, c); }
  bool in_unit_range() const noexcept;

  friend bool operator==(RealImage const &, RealImage const &) = default;

private:
  Matrix pixels_;
};

/// Binary undersampling pattern. Stored DC-centered: the low-frequency area sits
/// at (rows/2, cols/2), as it is displayed and as the mask families are defined.
class SamplingMask
{
public:
  SamplingMask() = default;
  SamplingMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);
  static SamplingMask filled(std::size_t rows, std::size_t cols, bool value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const noexcept { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool value) noexcept { bits_[r * cols_ + c] = value ? 1 : 0; }
  std::span<std::uint8_t const> bits() const noexcept { return bits_; }
  std::size_t count() const noexcept;

  friend bool operator==(SamplingMask const &, SamplingMask const &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Per-point Bernoulli acquisition probabilities, every entry in [0, 1].
/// The tighter [p_min, 1] bound and the mean-rate constraint are enforced by
/// project_probabilities().
class ProbabilityMatrix
{
public:
  ProbabilityMatrix() = default;
  explicit ProbabilityMatrix(Matrix probs);
  static ProbabilityMatrix uniform(std::size_t rows, std::size_t cols, double p);

  std::size_t rows() const noexcept { return probs_.rows(); }
  std::size_t cols() const noexcept { return probs_.cols(); }
  Matrix const &probs() const noexcept { return probs_; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return probs_(r, c); }
  double mean() const noexcept;

  friend bool operator==(ProbabilityMatrix const &, ProbabilityMatrix const &) = default;

private:
  Matrix probs_;
};

/// Fraction of sampled points.
double rate_of(SamplingMask const &mask);

/// Normalized log(1 + |K|) image of a k-space grid, for previews. Max pixel is 1
/// unless the grid is all zero.
RealImage hermitian_symmetrize_display(ComplexGrid const &grid);

/// Element-wise |z| of a complex grid.
Matrix magnitude(ComplexGrid const &grid);

} // namespace pupo
