#include "oracles.hpp"

#include "pupo/baselines.hpp"

#include <doctest.h>

using namespace pupo;

namespace {

std::vector<oracle::Point> points_of(SamplingMask const &mask)
{
  std::vector<oracle::Point> pts;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      if (mask(r, c)) pts.emplace_back(static_cast<double>(r), static_cast<double>(c));
    }
  }
  return pts;
}

bool column_full(SamplingMask const &mask, std::size_t c)
{
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    if (!mask(r, c)) return false;
  }
  return true;
}

bool column_empty(SamplingMask const &mask, std::size_t c)
{
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    if (mask(r, c)) return false;
  }
  return true;
}

// Mean sampled fraction within distance [lo, hi) of DC.
double ring_rate(SamplingMask const &mask, double lo, double hi)
{
  double on = 0.0;
  double all = 0.0;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      double const d = std::hypot(static_cast<double>(r) - mask.rows() / 2.0, static_cast<double>(c) - mask.cols() / 2.0);
      if (d >= lo && d < hi) {
        all += 1.0;
        on += mask(r, c) ? 1.0 : 0.0;
      }
    }
  }
  return on / all;
}

} // namespace

TEST_CASE("family names round trip")
{
  for (auto f : {BaselineFamily::gaussian, BaselineFamily::poisson, BaselineFamily::line1d, BaselineFamily::center_block,
                 BaselineFamily::uniform_grid}) {
    CHECK(parse_family(family_name(f)) == f);
  }
  CHECK_THROWS_AS(parse_family("spiral"), std::invalid_argument);
}

TEST_CASE("spec validation")
{
  CHECK_THROWS_AS((BaselineSpec{.target_rate = 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BaselineSpec{.target_rate = 1.2}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BaselineSpec{.sigma = -1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BaselineSpec{.min_distance = 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BaselineSpec{.center_fraction = 1.5}.validate()), std::invalid_argument);
}

TEST_CASE("point families hit the exact budget")
{
  for (double rate : {0.1, 0.2, 0.3, 0.5}) {
    auto const want = static_cast<std::size_t>(std::llround(rate * 48 * 40));
    CHECK(gaussian_mask({.family = BaselineFamily::gaussian, .target_rate = rate}, 48, 40).count() == want);
    CHECK(poisson_mask({.family = BaselineFamily::poisson, .target_rate = rate}, 48, 40).count() == want);
    CHECK(gaussian_mask({.family = BaselineFamily::gaussian, .target_rate = rate, .sigma = kFlatSigma}, 48, 40).count() ==
          want);
  }
}

TEST_CASE("gaussian mask concentrates on low frequencies")
{
  auto const mask = gaussian_mask({.family = BaselineFamily::gaussian, .target_rate = 0.2, .seed = 3}, 64, 64);
  CHECK(mask(32, 32));
  CHECK(ring_rate(mask, 0.0, 8.0) > ring_rate(mask, 8.0, 16.0));
  CHECK(ring_rate(mask, 8.0, 16.0) > ring_rate(mask, 24.0, 46.0));
  // a narrower density packs the center more densely
  auto const narrow = gaussian_mask({.family = BaselineFamily::gaussian, .target_rate = 0.2, .sigma = 6.0}, 64, 64);
  CHECK(ring_rate(narrow, 0.0, 8.0) >= ring_rate(mask, 0.0, 8.0));
}

TEST_CASE("gaussian mask refuses a budget its density cannot support")
{
  // sigma so small that almost every density value underflows to zero
  CHECK_THROWS_AS(gaussian_mask({.family = BaselineFamily::gaussian, .target_rate = 0.9, .sigma = 0.3}, 32, 32),
                  std::invalid_argument);
}

TEST_CASE("poisson mask respects its minimum distance outside the center")
{
  BaselineSpec const spec{.family = BaselineFamily::poisson, .target_rate = 0.15, .min_distance = 2.0, .seed = 2};
  auto const mask = poisson_mask(spec, 40, 40);
  CHECK(oracle::all_pairs_min(points_of(mask)) >= 2.0);
  CHECK(min_pairwise_distance(mask) == doctest::Approx(oracle::all_pairs_min(points_of(mask))));
  CHECK_THROWS_AS(poisson_mask({.family = BaselineFamily::poisson, .target_rate = 0.5, .min_distance = 3.0}, 40, 40),
                  std::invalid_argument);
}

TEST_CASE("poisson center square is fully sampled")
{
  auto const mask =
    poisson_mask({.family = BaselineFamily::poisson, .target_rate = 0.3, .center_fraction = 0.5}, 64, 64);
  // half of 1229 points in the center: a square of side ~24 around (32, 32)
  for (std::size_t r = 26; r < 38; ++r) {
    for (std::size_t c = 26; c < 38; ++c) CHECK(mask(r, c));
  }
}

TEST_CASE("line families sample whole columns")
{
  for (auto family : {BaselineFamily::line1d, BaselineFamily::center_block}) {
    auto const mask = make_baseline({.family = family, .target_rate = 0.25, .seed = 1}, 32, 40);
    std::size_t full = 0;
    for (std::size_t c = 0; c < 40; ++c) {
      CHECK((column_full(mask, c) || column_empty(mask, c)));
      full += column_full(mask, c) ? 1 : 0;
    }
    CHECK(full == 10);
    CHECK(column_full(mask, 20));
  }
  auto const block = center_block_mask({.family = BaselineFamily::center_block, .target_rate = 0.25}, 32, 40);
  for (std::size_t c = 15; c < 25; ++c) CHECK(column_full(block, c));
}

TEST_CASE("uniform grid: center square plus an even lattice, count within one line")
{
  auto const mask =
    uniform_grid_mask({.family = BaselineFamily::uniform_grid, .target_rate = 0.2, .center_fraction = 0.3}, 64, 64);
  auto const want = static_cast<double>(std::llround(0.2 * 64 * 64));
  CHECK(std::abs(static_cast<double>(mask.count()) - want) <= 64.0);
  CHECK(mask(32, 32));
  // outside the center only lattice points remain; their rows are evenly spaced
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < 64; ++r) {
    bool hit = false;
    for (std::size_t c = 0; c < 64; ++c) {
      hit = hit || (mask(r, c) && (c < 12 || c >= 52));
    }
    if (hit) rows.push_back(r);
  }
  REQUIRE(rows.size() >= 3);
  std::size_t lo = 64;
  std::size_t hi = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    lo = std::min(lo, rows[i] - rows[i - 1]);
    hi = std::max(hi, rows[i] - rows[i - 1]);
  }
  CHECK(hi - lo <= 1);
}

TEST_CASE("uniform grid at rate 0.25 is a stride-2 lattice")
{
  auto const mask = uniform_grid_mask({.family = BaselineFamily::uniform_grid, .target_rate = 0.25}, 64, 48);
  CHECK(rate_of(mask) == 0.25);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 48; ++c) CHECK(mask(r, c) == (r % 2 == 0 && c % 2 == 0));
  }
}

TEST_CASE("baselines are deterministic in the seed")
{
  for (auto family : {BaselineFamily::gaussian, BaselineFamily::poisson, BaselineFamily::line1d}) {
    BaselineSpec spec{.family = family, .target_rate = 0.3, .seed = 5};
    auto const a = make_baseline(spec, 32, 32);
    CHECK(make_baseline(spec, 32, 32) == a);
    spec.seed = 6;
    CHECK_FALSE(make_baseline(spec, 32, 32) == a);
  }
}

TEST_CASE("min_pairwise_distance against all pairs")
{
  SamplingMask mask = SamplingMask::filled(10, 10, false);
  CHECK(std::isinf(min_pairwise_distance(mask)));
  mask.set(1, 1, true);
  mask.set(4, 5, true);
  CHECK(min_pairwise_distance(mask) == doctest::Approx(5.0));
  mask.set(9, 9, true);
  mask.set(8, 8, true);
  CHECK(min_pairwise_distance(mask) == doctest::Approx(std::sqrt(2.0)));
}
