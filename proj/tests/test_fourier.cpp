#include "oracles.hpp"

#include "pupo/fourier.hpp"

#include <doctest.h>

using namespace pupo;

namespace {

double max_abs_diff(oracle::CGrid const &a, oracle::CGrid const &b)
{
  double worst = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      worst = std::max(worst, std::abs(a[r][c] - b[r][c]));
    }
  }
  return worst;
}

double max_abs(oracle::CGrid const &a)
{
  double worst = 0.0;
  for (auto const &row : a) {
    for (auto v : row) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

} // namespace

TEST_CASE("dft matrix is symmetric and unitary up to 1/n")
{
  for (std::size_t n : {1u, 2u, 5u, 8u}) {
    auto const &f = dft_matrix(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(f.real()(j, k) == f.real()(k, j));
        CHECK(f.imag()(j, k) == f.imag()(k, j));
        // row j of F times column k of F^H
        oracle::cplx acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          acc += oracle::cplx(f.real()(j, t), f.imag()(j, t)) * std::conj(oracle::cplx(f.real()(k, t), f.imag()(k, t)));
        }
        CHECK(std::abs(acc / static_cast<double>(n) - (j == k ? 1.0 : 0.0)) < 1e-13);
      }
    }
  }
}

TEST_CASE("forward_2d matches the double sum on rectangular grids")
{
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{8, 8}, {5, 7}, {1, 4}, {6, 1}}) {
    auto const x = oracle::random_complex(m, n, 11 + m * n);
    auto const ref = oracle::brute_dft(oracle::to_cgrid(x));
    auto const got = oracle::to_cgrid(forward_2d(x));
    CHECK(max_abs_diff(got, ref) / max_abs(ref) < 1e-12);
  }
}

TEST_CASE("inverse_2d matches the scaled conjugate double sum")
{
  auto const k = oracle::random_complex(6, 4, 3);
  auto ref = oracle::brute_dft(oracle::to_cgrid(k), +1.0);
  for (auto &row : ref) {
    for (auto &v : row) v /= 24.0;
  }
  CHECK(max_abs_diff(oracle::to_cgrid(inverse_2d(k)), ref) < 1e-13);
}

TEST_CASE("forward of a delta is all ones; forward of a constant is a DC spike")
{
  Matrix re(4, 4);
  re(0, 0) = 1.0;
  auto const k = forward_2d(ComplexGrid::from_real(re));
  for (double v : k.real().values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : k.imag().values()) CHECK(std::abs(v) < 1e-15);

  auto const flat = forward_2d(ComplexGrid::from_real(Matrix(4, 6, 0.5)));
  CHECK(flat.real()(0, 0) == doctest::Approx(12.0));
  for (std::size_t i = 1; i < flat.real().size(); ++i) CHECK(std::abs(flat.real().values()[i]) < 1e-12);
}

TEST_CASE("round trip and Parseval")
{
  auto const x = oracle::random_complex(16, 12, 5);
  auto const k = forward_2d(x);
  auto const back = inverse_2d(k);
  CHECK(max_abs_diff(oracle::to_cgrid(back), oracle::to_cgrid(x)) < 1e-12);

  double ex = 0.0;
  double ek = 0.0;
  for (std::size_t i = 0; i < x.real().size(); ++i) {
    ex += std::norm(oracle::cplx(x.real().values()[i], x.imag().values()[i]));
    ek += std::norm(oracle::cplx(k.real().values()[i], k.imag().values()[i]));
  }
  CHECK(std::abs(ek / (16.0 * 12.0) - ex) / ex < 1e-12);
}

TEST_CASE("a real image has Hermitian-symmetric k-space")
{
  auto const k = forward_2d(ComplexGrid::from_real(oracle::random_matrix(6, 5, 9)));
  for (std::size_t u = 0; u < 6; ++u) {
    for (std::size_t v = 0; v < 5; ++v) {
      CHECK(k.real()(u, v) == doctest::Approx(k.real()((6 - u) % 6, (5 - v) % 5)).epsilon(1e-12));
      CHECK(k.imag()(u, v) == doctest::Approx(-k.imag()((6 - u) % 6, (5 - v) % 5)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ift_backward is the adjoint of inverse_2d")
{
  // <inverse(K), G> == <K, ift_backward(G)> with the real inner product on (Re, Im).
  auto const k = oracle::random_complex(7, 6, 21);
  auto const g = oracle::random_complex(7, 6, 22);
  auto const x = inverse_2d(k);
  auto const b = ift_backward(g);
  auto dot = [](ComplexGrid const &a, ComplexGrid const &c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.real().size(); ++i) {
      s += a.real().values()[i] * c.real().values()[i] + a.imag().values()[i] * c.imag().values()[i];
    }
    return s;
  };
  CHECK(dot(x, g) == doctest::Approx(dot(k, b)).epsilon(1e-12));
}

TEST_CASE("ift_backward matches finite differences of a nonlinear loss")
{
  std::size_t const m = 5;
  std::size_t const n = 4;
  auto const w = oracle::random_complex(m, n, 31);
  auto const k0 = oracle::random_complex(m, n, 32);
  std::vector<double> re(k0.real().values().begin(), k0.real().values().end());
  std::vector<double> im(k0.imag().values().begin(), k0.imag().values().end());

  // L = sum w . x + 1/4 sum |x|^4
  auto loss = [&] {
    auto const x = inverse_2d(ComplexGrid(Matrix(m, n, re), Matrix(m, n, im)));
    double s = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
      double const a = x.real().values()[i];
      double const b = x.imag().values()[i];
      s += w.real().values()[i] * a + w.imag().values()[i] * b + 0.25 * (a * a + b * b) * (a * a + b * b);
    }
    return s;
  };
  auto const x = inverse_2d(k0);
  Matrix gr(m, n);
  Matrix gi(m, n);
  for (std::size_t i = 0; i < re.size(); ++i) {
    double const a = x.real().values()[i];
    double const b = x.imag().values()[i];
    double const r2 = a * a + b * b;
    gr.values()[i] = w.real().values()[i] + r2 * a;
    gi.values()[i] = w.imag().values()[i] + r2 * b;
  }
  auto const analytic = ift_backward(ComplexGrid(gr, gi));
  auto const fd_re = oracle::central_differences(re, loss, 1e-6);
  auto const fd_im = oracle::central_differences(im, loss, 1e-6);
  std::vector<double> a_re(analytic.real().values().begin(), analytic.real().values().end());
  std::vector<double> a_im(analytic.imag().values().begin(), analytic.imag().values().end());
  CHECK(oracle::max_relative_error(a_re, fd_re, 1e-6) < 1e-6);
  CHECK(oracle::max_relative_error(a_im, fd_im, 1e-6) < 1e-6);
}

TEST_CASE("center_shift moves DC to the middle and the inverse undoes it")
{
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{4, 6}, {5, 7}, {3, 4}}) {
    Matrix a(m, n);
    for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] = static_cast<double>(i);
    Matrix const s = center_shift(a);
    CHECK(s(m / 2, n / 2) == a(0, 0));
    CHECK(inverse_center_shift(s) == a);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        CHECK(s((r + m / 2) % m, (c + n / 2) % n) == a(r, c));
      }
    }
  }
  SamplingMask mask = SamplingMask::filled(4, 4, false);
  mask.set(0, 0, true);
  CHECK(center_shift(mask)(2, 2));
  CHECK(inverse_center_shift(center_shift(mask)) == mask);
}

TEST_CASE("shape mismatches are rejected")
{
  CHECK_THROWS_AS(ComplexGrid(Matrix(2, 3), Matrix(3, 2)), ShapeError);
}
