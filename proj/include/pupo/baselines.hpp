#pragma once

#include "pupo/core.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace pupo {

enum class BaselineFamily
{
  gaussian,
  poisson,
  line1d,
  center_block,
  uniform_grid,
};

std::string_view family_name(BaselineFamily family) noexcept;
/// Throws std::invalid_argument for unknown names.
BaselineFamily parse_family(std::string_view name);

/// Fixed (non-learned) mask family plus its parameters. Unset optionals take
/// the family default.
struct BaselineSpec
{
  BaselineFamily family = BaselineFamily::gaussian;
  double target_rate = 0.2;
  /// gaussian: density width in pixels. Default: a quarter of the smaller
  /// side. +infinity gives a flat density (uniform random mask).
  std::optional<double> sigma{};
  /// poisson: minimum pairwise distance. Default: derived from the rate and
  /// relaxed until the point budget fits.
  std::optional<double> min_distance{};
  /// Share of the point (or line) budget spent on a fully sampled center.
  /// poisson: square, default 0. line1d: contiguous band, default 0.25.
  /// uniform_grid: square, default 0 (a plain lattice).
  std::optional<double> center_fraction{};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on rate outside (0,1] or non-positive parameters.
  void validate() const;
};

inline constexpr double kFlatSigma = std::numeric_limits<double>::infinity();

/// Bernoulli draw from a DC-centered isotropic Gaussian density scaled to the
/// target rate, then trimmed or topped up to exactly round(rate * m * n) points.
SamplingMask gaussian_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// Poisson-disc mask: random sequential placement over a shuffled pixel order
/// with a minimum pairwise distance, optional fully sampled center square,
/// exactly round(rate * m * n) points.
SamplingMask poisson_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// round(rate * n) full columns: a contiguous center band plus random outer columns.
SamplingMask line1d_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// round(rate * n) contiguous full columns centered on the DC column.
SamplingMask center_block_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// Fully sampled center square plus an evenly spaced point lattice through DC.
/// Lattice steps vary by at most one pixel; the point count is within one
/// line of round(rate * m * n).
SamplingMask uniform_grid_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// Dispatch on spec.family.
SamplingMask make_baseline(BaselineSpec const &spec, std::size_t rows, std::size_t cols);

/// Smallest pairwise distance among the set points (+infinity below two points).
double min_pairwise_distance(SamplingMask const &mask);

} // namespace pupo
