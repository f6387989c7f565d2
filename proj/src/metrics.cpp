#include "pupo/metrics.hpp"

#include <cmath>

namespace pupo {

double mse(RealImage const &a, RealImage const &b)
{
  require_same_shape(a.pixels(), b.pixels(), "mse");
  auto const x = a.pixels().values();
  auto const y = b.pixels().values();
  if (x.empty()) {
    throw ShapeError("mse: empty images");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double const d = x[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

double psnr(RealImage const &a, RealImage const &b, double peak)
{
  double const e = mse(a, b);
  if (e == 0.0) {
    return kInfinitePsnr;
  }
  return 10.0 * std::log10(peak * peak / e);
}

double mean_psnr(std::span<double const> values)
{
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double s = 0.0;
  for (double v : values) {
    if (std::isinf(v)) {
      return kInfinitePsnr;
    }
    s += v;
  }
  return s / static_cast<double>(values.size());
}

} // namespace pupo
