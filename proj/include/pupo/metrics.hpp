#pragma once

#include "pupo/core.hpp"

#include <limits>
#include <span>

namespace pupo {

/// PSNR of an exact match.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// (1/N) ||a - b||_F^2
double mse(RealImage const &a, RealImage const &b);

/// 10 log10(peak^2 / MSE) in dB; kInfinitePsnr when the images are identical.
double psnr(RealImage const &a, RealImage const &b, double peak = 1.0);

/// Arithmetic mean; infinite as soon as one entry is. NaN for an empty span.
double mean_psnr(std::span<double const> values);

} // namespace pupo
