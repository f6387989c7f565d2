#include "pupo/baselines.hpp"

#include "pupo/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pupo {

std::string_view family_name(BaselineFamily family) noexcept
{
  switch (family) {
  case BaselineFamily::gaussian:
    return "gaussian";
  case BaselineFamily::poisson:
    return "poisson";
  case BaselineFamily::line1d:
    return "line1d";
  case BaselineFamily::center_block:
    return "center_block";
  case BaselineFamily::uniform_grid:
    return "uniform_grid";
  }
  return "unknown";
}

BaselineFamily parse_family(std::string_view name)
{
  for (auto f : {BaselineFamily::gaussian, BaselineFamily::poisson, BaselineFamily::line1d,
                 BaselineFamily::center_block, BaselineFamily::uniform_grid}) {
    if (family_name(f) == name) {
      return f;
    }
  }
  throw std::invalid_argument("unknown mask family: " + std::string(name));
}

void BaselineSpec::validate() const
{
  if (!(target_rate > 0.0 && target_rate <= 1.0)) {
    throw std::invalid_argument("target rate must lie in (0, 1]");
  }
  if (sigma && !(*sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (min_distance && !(*min_distance > 0.0 && std::isfinite(*min_distance))) {
    throw std::invalid_argument("minimum distance must be positive");
  }
  if (center_fraction && !(*center_fraction >= 0.0 && *center_fraction <= 1.0)) {
    throw std::invalid_argument("center fraction must lie in [0, 1]");
  }
}

namespace {

std::size_t point_budget(double rate, std::size_t rows, std::size_t cols)
{
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(rows * cols)));
}

void require_grid(std::size_t rows, std::size_t cols)
{
  if (rows == 0 || cols == 0) {
    throw ShapeError("mask dimensions must be positive");
  }
}

// Centered square of side `side` around (rows/2, cols/2).
struct Square
{
  std::size_t r0, c0, side;
  bool contains(std::size_t r, std::size_t c) const noexcept
  {
    return r >= r0 && r < r0 + side && c >= c0 && c < c0 + side;
  }
};

Square center_square(std::size_t budget, double fraction, std::size_t rows, std::size_t cols)
{
  auto side = static_cast<std::size_t>(std::floor(std::sqrt(fraction * static_cast<double>(budget))));
  side = std::min({side, rows, cols});
  return {rows / 2 - side / 2, cols / 2 - side / 2, side};
}

} // namespace

SamplingMask gaussian_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  spec.validate();
  require_grid(rows, cols);
  double const sigma = spec.sigma.value_or(static_cast<double>(std::min(rows, cols)) / 4.0);
  std::size_t const total = rows * cols;
  std::size_t const budget = point_budget(spec.target_rate, rows, cols);

  std::vector<double> density(total, 1.0);
  if (std::isfinite(sigma)) {
    double const cr = static_cast<double>(rows / 2);
    double const cc = static_cast<double>(cols / 2);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double const dr = static_cast<double>(r) - cr;
        double const dc = static_cast<double>(c) - cc;
        density[r * cols + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      }
    }
  }
  std::size_t const positive = static_cast<std::size_t>(
    std::count_if(density.begin(), density.end(), [](double d) { return d > 0.0; }));
  if (positive < budget) {
    throw std::invalid_argument("rate infeasible for sigma: the density is zero on too many points");
  }

  // Scale s with mean(min(1, s * density)) = rate.
  double smallest = 1.0;
  for (double d : density) {
    if (d > 0.0) {
      smallest = std::min(smallest, d);
    }
  }
  auto mean_prob = [&](double s) {
    double acc = 0.0;
    for (double d : density) {
      acc += std::min(1.0, s * d);
    }
    return acc / static_cast<double>(total);
  };
  double lo = 0.0;
  double hi = 1.0 / smallest;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double const mid = 0.5 * (lo + hi);
    (mean_prob(mid) < spec.target_rate ? lo : hi) = mid;
  }
  std::vector<double> prob(total);
  for (std::size_t i = 0; i < total; ++i) {
    prob[i] = std::min(1.0, hi * density[i]);
  }

  Rng rng(spec.seed);
  std::vector<std::uint8_t> bits(total, 0);
  std::vector<std::size_t> on;
  std::vector<std::size_t> off;
  for (std::size_t i = 0; i < total; ++i) {
    bits[i] = rng.uniform() < prob[i] ? 1 : 0;
    (bits[i] ? on : off).push_back(i);
  }
  if (on.size() > budget) {
    shuffle(on.begin(), on.end(), rng);
    for (std::size_t k = 0; k < on.size() - budget; ++k) {
      bits[on[k]] = 0;
    }
  } else if (on.size() < budget) {
    // Weighted sampling without replacement: keep the largest log(u) / weight.
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i : off) {
      double const u = rng.uniform();
      if (prob[i] > 0.0) {
        keyed.emplace_back(std::log(u) / prob[i], i);
      }
    }
    std::size_t const need = budget - on.size();
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(need), keyed.end(),
                      [](auto const &a, auto const &b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t k = 0; k < need; ++k) {
      bits[keyed[k].second] = 1;
    }
  }
  return SamplingMask(rows, cols, std::move(bits));
}

SamplingMask poisson_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  spec.validate();
  require_grid(rows, cols);
  std::size_t const total = rows * cols;
  std::size_t const budget = point_budget(spec.target_rate, rows, cols);
  Square const center = center_square(budget, spec.center_fraction.value_or(0.0), rows, cols);
  std::size_t const center_points = center.side * center.side;
  std::size_t const outer_budget = budget - center_points;
  std::size_t const outer_area = total - center_points;

  double r = 1.0;
  if (spec.min_distance) {
    r = *spec.min_distance;
  } else if (outer_budget > 0) {
    double const outer_rate = static_cast<double>(outer_budget) / static_cast<double>(outer_area);
    r = std::max(1.0, std::sqrt(0.5 / outer_rate));
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> order;
  order.reserve(outer_area);
  for (std::size_t i = 0; i < total; ++i) {
    if (!center.contains(i / cols, i % cols)) {
      order.push_back(i);
    }
  }
  shuffle(order.begin(), order.end(), rng);

  auto const h = static_cast<std::ptrdiff_t>(rows);
  auto const w = static_cast<std::ptrdiff_t>(cols);
  for (;;) {
    std::vector<std::uint8_t> bits(total, 0);
    for (std::size_t r2 = center.r0; r2 < center.r0 + center.side; ++r2) {
      for (std::size_t c2 = center.c0; c2 < center.c0 + center.side; ++c2) {
        bits[r2 * cols + c2] = 1;
      }
    }
    double const r_sq = r * r;
    auto const reach = static_cast<std::ptrdiff_t>(std::ceil(r));
    std::size_t placed = 0;
    for (std::size_t idx : order) {
      if (placed == outer_budget) {
        break;
      }
      auto const pr = static_cast<std::ptrdiff_t>(idx / cols);
      auto const pc = static_cast<std::ptrdiff_t>(idx % cols);
      bool ok = true;
      for (std::ptrdiff_t dr = -reach; dr <= reach && ok; ++dr) {
        std::ptrdiff_t const qr = pr + dr;
        if (qr < 0 || qr >= h) {
          continue;
        }
        for (std::ptrdiff_t dc = -reach; dc <= reach; ++dc) {
          std::ptrdiff_t const qc = pc + dc;
          if (qc < 0 || qc >= w || (dr == 0 && dc == 0)) {
            continue;
          }
          if (bits[static_cast<std::size_t>(qr * w + qc)] &&
              static_cast<double>(dr * dr + dc * dc) < r_sq) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        bits[idx] = 1;
        ++placed;
      }
    }
    if (placed == outer_budget) {
      return SamplingMask(rows, cols, std::move(bits));
    }
    if (spec.min_distance || r <= 1.0) {
      throw std::invalid_argument("minimum distance too large for the requested rate");
    }
    r = std::max(1.0, r * 0.9);
  }
}

SamplingMask line1d_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  spec.validate();
  require_grid(rows, cols);
  auto const lines = static_cast<std::size_t>(std::llround(spec.target_rate * static_cast<double>(cols)));
  auto const band = std::min(
    lines, static_cast<std::size_t>(std::llround(spec.center_fraction.value_or(0.25) * static_cast<double>(lines))));
  std::vector<std::uint8_t> chosen(cols, 0);
  std::size_t const start = cols / 2 - std::min(cols / 2, band / 2);
  for (std::size_t c = start; c < start + band; ++c) {
    chosen[c] = 1;
  }
  std::vector<std::size_t> rest;
  for (std::size_t c = 0; c < cols; ++c) {
    if (!chosen[c]) {
      rest.push_back(c);
    }
  }
  Rng rng(spec.seed);
  shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t k = 0; k < lines - band; ++k) {
    chosen[rest[k]] = 1;
  }
  std::vector<std::uint8_t> bits(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(chosen.begin(), chosen.end(), bits.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return SamplingMask(rows, cols, std::move(bits));
}

SamplingMask center_block_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  spec.validate();
  require_grid(rows, cols);
  auto const lines = static_cast<std::size_t>(std::llround(spec.target_rate * static_cast<double>(cols)));
  std::size_t const start = cols / 2 - std::min(cols / 2, lines / 2);
  SamplingMask mask = SamplingMask::filled(rows, cols, false);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = start; c < start + lines; ++c) {
      mask.set(r, c, true);
    }
  }
  return mask;
}

namespace {

// k positions evenly spread over [0, n) starting at n/2, wrapping around.
std::vector<std::size_t> lattice(std::size_t n, std::size_t k)
{
  std::vector<std::size_t> pos(k);
  for (std::size_t i = 0; i < k; ++i) {
    pos[i] = (n / 2 + i * n / k) % n;
  }
  std::sort(pos.begin(), pos.end());
  return pos;
}

std::size_t count_inside(std::vector<std::size_t> const &pos, std::size_t lo, std::size_t len)
{
  return static_cast<std::size_t>(
    std::count_if(pos.begin(), pos.end(), [&](std::size_t p) { return p >= lo && p < lo + len; }));
}

} // namespace

SamplingMask uniform_grid_mask(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  spec.validate();
  require_grid(rows, cols);
  std::size_t const budget = point_budget(spec.target_rate, rows, cols);
  Square const center = center_square(budget, spec.center_fraction.value_or(0.0), rows, cols);

  struct Choice
  {
    std::size_t kr, kc, error;
    double aspect;
  };
  std::optional<Choice> best;
  for (std::size_t kr = 1; kr <= rows; ++kr) {
    auto const base = static_cast<std::ptrdiff_t>(
      std::llround(static_cast<double>(kr) * static_cast<double>(cols) / static_cast<double>(rows)));
    for (std::ptrdiff_t d = -1; d <= 1; ++d) {
      std::ptrdiff_t const kc_signed = base + d;
      if (kc_signed < 1 || kc_signed > static_cast<std::ptrdiff_t>(cols)) {
        continue;
      }
      auto const kc = static_cast<std::size_t>(kc_signed);
      std::size_t const overlap =
        count_inside(lattice(rows, kr), center.r0, center.side) * count_inside(lattice(cols, kc), center.c0, center.side);
      std::size_t const count = kr * kc + center.side * center.side - overlap;
      std::size_t const error = count > budget ? count - budget : budget - count;
      double const aspect = std::abs(static_cast<double>(kr) / static_cast<double>(rows) -
                                     static_cast<double>(kc) / static_cast<double>(cols));
      if (!best || error < best->error || (error == best->error && aspect < best->aspect)) {
        best = Choice{kr, kc, error, aspect};
      }
    }
  }

  SamplingMask mask = SamplingMask::filled(rows, cols, false);
  for (std::size_t r = center.r0; r < center.r0 + center.side; ++r) {
    for (std::size_t c = center.c0; c < center.c0 + center.side; ++c) {
      mask.set(r, c, true);
    }
  }
  auto const lr = lattice(rows, best->kr);
  auto const lc = lattice(cols, best->kc);
  for (std::size_t r : lr) {
    for (std::size_t c : lc) {
      mask.set(r, c, true);
    }
  }
  return mask;
}

SamplingMask make_baseline(BaselineSpec const &spec, std::size_t rows, std::size_t cols)
{
  switch (spec.family) {
  case BaselineFamily::gaussian:
    return gaussian_mask(spec, rows, cols);
  case BaselineFamily::poisson:
    return poisson_mask(spec, rows, cols);
  case BaselineFamily::line1d:
    return line1d_mask(spec, rows, cols);
  case BaselineFamily::center_block:
    return center_block_mask(spec, rows, cols);
  case BaselineFamily::uniform_grid:
    return uniform_grid_mask(spec, rows, cols);
  }
  throw std::invalid_argument("unknown mask family");
}

double min_pairwise_distance(SamplingMask const &mask)
{
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      if (mask(r, c)) {
        pts.emplace_back(static_cast<double>(r), static_cast<double>(c));
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::min(best, std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second));
    }
  }
  return best;
}

} // namespace pupo
