#pragma once

#include "pupo/core.hpp"

namespace pupo {

/// n x n DFT matrix F_n with entries w^(jk), w = exp(-i 2 pi / n). Symmetric,
/// and (1/n) F_n F_n^H = I. Real and imaginary planes are kept separately.
class FourierMatrix
{
public:
  explicit FourierMatrix(std::size_t n);

  std::size_t n() const noexcept { return real_.rows(); }
  Matrix const &real() const noexcept { return real_; }
  Matrix const &imag() const noexcept { return imag_; }

private:
  Matrix real_;
  Matrix imag_;
};

/// Cached F_n. Built once per size and shared; the matrices are never trained.
FourierMatrix const &dft_matrix(std::size_t n);

/// F_m X F_n: the unnormalized 2D DFT, DC at (0,0).
ComplexGrid forward_2d(ComplexGrid const &x);

/// (1/mn) F_m^H K F_n^H: the exact inverse of forward_2d.
ComplexGrid inverse_2d(ComplexGrid const &k);

/// Gradient of a real loss with respect to the input of inverse_2d, given the
/// gradient with respect to its output.
///
/// Gradients are carried as dL/dRe + i dL/dIm. Under that convention the
/// matrix-form IFT backward rule, (1/mn) F_m^H G F_n^H, applies to the
/// conjugate of the gradient, so the returned grid is
/// conj((1/mn) F_m^H conj(G) F_n^H) = (1/mn) F_m G F_n. This is the exact
/// adjoint of inverse_2d as a real-linear map.
ComplexGrid ift_backward(ComplexGrid const &grad_out);

// Quadrant swap that moves DC from (0,0) to (rows/2, cols/2). The inverse
// variant undoes it for odd sizes too; for even sizes both are the same map.
Matrix center_shift(Matrix const &m);
Matrix inverse_center_shift(Matrix const &m);
ComplexGrid center_shift(ComplexGrid const &g);
ComplexGrid inverse_center_shift(ComplexGrid const &g);
SamplingMask center_shift(SamplingMask const &mask);
SamplingMask inverse_center_shift(SamplingMask const &mask);
ProbabilityMatrix center_shift(ProbabilityMatrix const &p);
ProbabilityMatrix inverse_center_shift(ProbabilityMatrix const &p);

} // namespace pupo
