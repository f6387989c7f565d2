#pragma once

#include "pupo/core.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace pupo {

/// Parameters of the total-rate and regional-distance constraints.
struct StableConstraintConfig
{
  double target_rate = 0.2;
  double epsilon = 1e-3;
  std::size_t region_size = 10;
  double p_min = 0.01;
  double p_max = 1.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when the rate, epsilon or probability
  /// bounds are inconsistent.
  void validate_bounds() const;
  /// validate_bounds() plus: the region must fit an m x n grid.
  void validate(std::size_t rows, std::size_t cols) const;
};

/// Placement summary of one region_size x region_size cell of a stable mask.
struct RegionReport
{
  std::size_t region_row = 0;
  std::size_t region_col = 0;
  double p_mean = 0.0;
  std::size_t count = 0;
  double min_dist = 0.0;     ///< smallest pairwise distance, 0 when count < 2
  double max_nn_dist = 0.0;  ///< largest nearest-neighbor distance, 0 when count < 2
  double r0 = 0.0;           ///< minimal distance actually enforced (after any relaxation)
};

TwoChannelGrid split_channels(ComplexGrid const &k);
ComplexGrid merge_channels(TwoChannelGrid const &x);

/// Hadamard product of both channels with the mask; discarded points become 0.
TwoChannelGrid apply_mask(TwoChannelGrid const &x_in, SamplingMask const &mask);

/// Independent Bernoulli draw per entry, deterministic in the seed.
SamplingMask sample_bernoulli(ProbabilityMatrix const &p, std::uint64_t seed);

/// Clamp to [p_min, p_max] and shift uniformly (re-clamping) until the mean is
/// within epsilon of the target rate. Inputs that already satisfy both are
/// returned unchanged.
ProbabilityMatrix project_probabilities(Matrix const &raw, StableConstraintConfig const &cfg);
ProbabilityMatrix project_probabilities(ProbabilityMatrix const &p, StableConstraintConfig const &cfg);

/// Region-mean probability as a function of the minimal point distance:
/// p = (sqrt2/10) r0^2 - (sqrt2/2) r0 + 1.
double probability_from_r0(double r0);

/// Inverse of probability_from_r0 on its decreasing branch r0 in [0, 2.5].
/// Probabilities below the vertex value (about 0.1161) map to 2.5.
double r0_from_probability(double p_mean);

/// Deterministic P -> M mapping under the stable constraints: exact global point
/// count round(rate * m * n), region_size cells laid out so that one cell is
/// centered on DC (border cells truncated), per-cell counts by largest-remainder apportionment
/// of the cell probability mass, and seeded dart throwing inside each cell with
/// nearest-neighbor distances in [r0, 2 r0] (integer-grid tolerance of 1 px on
/// the upper bound).
std::pair<SamplingMask, std::vector<RegionReport>>
generate_stable_mask(ProbabilityMatrix const &p, StableConstraintConfig const &cfg);

struct MaskGradients
{
  TwoChannelGrid grad_x_in;
  Matrix grad_p;
};

/// Backward pass of apply_mask. grad_x_in is exact; grad_p is the
/// straight-through estimate that treats the mask as P in the backward pass:
/// sum over channels of grad_out * x_in.
MaskGradients mask_backward(TwoChannelGrid const &grad_out, TwoChannelGrid const &x_in,
                            SamplingMask const &mask);

/// CSV: region_row,region_col,p_mean,count,min_dist,max_nn_dist,r0
void write_region_reports(std::filesystem::path const &path, std::vector<RegionReport> const &reports);

} // namespace pupo
