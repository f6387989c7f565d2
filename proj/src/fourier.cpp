#include "pupo/fourier.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace pupo {

FourierMatrix::FourierMatrix(std::size_t n)
  : real_(n, n)
  , imag_(n, n)
{
  if (n == 0) {
    throw std::invalid_argument("FourierMatrix: n must be positive");
  }
  double const step = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      // Reduce jk mod n before scaling so large exponents keep full accuracy.
      double const angle = step * static_cast<double>((j * k) % n);
      real_(j, k) = std::cos(angle);
      imag_(j, k) = std::sin(angle);
    }
  }
}

FourierMatrix const &dft_matrix(std::size_t n)
{
  static std::mutex lock;
  static std::map<std::size_t, std::unique_ptr<FourierMatrix const>> cache;
  std::lock_guard guard(lock);
  auto &slot = cache[n];
  if (!slot) {
    slot = std::make_unique<FourierMatrix const>(n);
  }
  return *slot;
}

namespace {

// C = A * B for complex matrices given as planes; conj flags negate an imaginary plane.
void complex_matmul(Matrix const &ar, Matrix const &ai, bool conj_a,
                    Matrix const &br, Matrix const &bi, bool conj_b,
                    Matrix &cr, Matrix &ci)
{
  std::size_t const p = ar.rows();
  std::size_t const q = ar.cols();
  std::size_t const r = br.cols();
  cr = Matrix(p, r);
  ci = Matrix(p, r);
  double const sa = conj_a ? -1.0 : 1.0;
  double const sb = conj_b ? -1.0 : 1.0;
  for (std::size_t i = 0; i < p; ++i) {
    double *crow = cr.row(i);
    double *irow = ci.row(i);
    for (std::size_t k = 0; k < q; ++k) {
      double const a_re = ar(i, k);
      double const a_im = sa * ai(i, k);
      double const *brow = br.row(k);
      double const *bim = bi.row(k);
      for (std::size_t j = 0; j < r; ++j) {
        double const b_im = sb * bim[j];
        crow[j] += a_re * brow[j] - a_im * b_im;
        irow[j] += a_re * b_im + a_im * brow[j];
      }
    }
  }
}

// (F_m^s) X (F_n^s) * scale, where s selects F or its conjugate.
ComplexGrid sandwich(ComplexGrid const &x, bool conjugate, double scale)
{
  auto const &fm = dft_matrix(x.rows());
  auto const &fn = dft_matrix(x.cols());
  Matrix tr, ti, outr, outi;
  complex_matmul(fm.real(), fm.imag(), conjugate, x.real(), x.imag(), false, tr, ti);
  complex_matmul(tr, ti, false, fn.real(), fn.imag(), conjugate, outr, outi);
  if (scale != 1.0) {
    for (double &v : outr.values()) {
      v *= scale;
    }
    for (double &v : outi.values()) {
      v *= scale;
    }
  }
  return ComplexGrid(std::move(outr), std::move(outi));
}

double inv_area(ComplexGrid const &g)
{
  return 1.0 / (static_cast<double>(g.rows()) * static_cast<double>(g.cols()));
}

Matrix roll(Matrix const &m, std::size_t dr, std::size_t dc)
{
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t const rr = (r + dr) % m.rows();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(rr, (c + dc) % m.cols()) = m(r, c);
    }
  }
  return out;
}

SamplingMask roll(SamplingMask const &m, std::size_t dr, std::size_t dc)
{
  std::vector<std::uint8_t> bits(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t const rr = (r + dr) % m.rows();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      bits[rr * m.cols() + (c + dc) % m.cols()] = m(r, c) ? 1 : 0;
    }
  }
  return SamplingMask(m.rows(), m.cols(), std::move(bits));
}

} // namespace

ComplexGrid forward_2d(ComplexGrid const &x)
{
  return sandwich(x, false, 1.0);
}

ComplexGrid inverse_2d(ComplexGrid const &k)
{
  return sandwich(k, true, inv_area(k));
}

ComplexGrid ift_backward(ComplexGrid const &grad_out)
{
  return sandwich(grad_out, false, inv_area(grad_out));
}

Matrix center_shift(Matrix const &m)
{
  return roll(m, m.rows() / 2, m.cols() / 2);
}

Matrix inverse_center_shift(Matrix const &m)
{
  return roll(m, m.rows() - m.rows() / 2, m.cols() - m.cols() / 2);
}

ComplexGrid center_shift(ComplexGrid const &g)
{
  return ComplexGrid(center_shift(g.real()), center_shift(g.imag()));
}

ComplexGrid inverse_center_shift(ComplexGrid const &g)
{
  return ComplexGrid(inverse_center_shift(g.real()), inverse_center_shift(g.imag()));
}

SamplingMask center_shift(SamplingMask const &mask)
{
  return roll(mask, mask.rows() / 2, mask.cols() / 2);
}

SamplingMask inverse_center_shift(SamplingMask const &mask)
{
  return roll(mask, mask.rows() - mask.rows() / 2, mask.cols() - mask.cols() / 2);
}

ProbabilityMatrix center_shift(ProbabilityMatrix const &p)
{
  return ProbabilityMatrix(center_shift(p.probs()));
}

ProbabilityMatrix inverse_center_shift(ProbabilityMatrix const &p)
{
  return ProbabilityMatrix(inverse_center_shift(p.probs()));
}

} // namespace pupo
