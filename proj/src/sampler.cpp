#include "pupo/sampler.hpp"

#include "pupo/io.hpp"
#include "pupo/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace pupo {

void StableConstraintConfig::validate_bounds() const
{
  if (!(target_rate > 0.0 && target_rate <= 1.0)) {
    throw std::invalid_argument("target rate must lie in (0, 1]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(p_min > 0.0 && p_min < p_max && p_max == 1.0)) {
    throw std::invalid_argument("probability bounds must satisfy 0 < p_min < p_max = 1");
  }
  if (target_rate < p_min) {
    throw std::invalid_argument("target rate below p_min is infeasible");
  }
}

void StableConstraintConfig::validate(std::size_t rows, std::size_t cols) const
{
  validate_bounds();
  if (region_size == 0 || region_size > std::min(rows, cols)) {
    throw std::invalid_argument("region size must lie in [1, min(rows, cols)]");
  }
}

TwoChannelGrid split_channels(ComplexGrid const &k)
{
  return TwoChannelGrid(k.real(), k.imag());
}

ComplexGrid merge_channels(TwoChannelGrid const &x)
{
  return ComplexGrid(x.channel0(), x.channel1());
}

namespace {

void require_mask_shape(std::size_t rows, std::size_t cols, SamplingMask const &mask, char const *what)
{
  if (rows != mask.rows() || cols != mask.cols()) {
    throw ShapeError(std::string(what) + ": mask is " + std::to_string(mask.rows()) + "x" +
                     std::to_string(mask.cols()) + ", data is " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Matrix masked(Matrix const &x, SamplingMask const &mask)
{
  Matrix out(x.rows(), x.cols());
  auto const bits = mask.bits();
  auto const src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = bits[i] ? src[i] : 0.0;
  }
  return out;
}

} // namespace

TwoChannelGrid apply_mask(TwoChannelGrid const &x_in, SamplingMask const &mask)
{
  require_mask_shape(x_in.rows(), x_in.cols(), mask, "apply_mask");
  return TwoChannelGrid(masked(x_in.channel0(), mask), masked(x_in.channel1(), mask));
}

SamplingMask sample_bernoulli(ProbabilityMatrix const &p, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<std::uint8_t> bits(p.rows() * p.cols());
  auto const probs = p.probs().values();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = rng.uniform() < probs[i] ? 1 : 0;
  }
  return SamplingMask(p.rows(), p.cols(), std::move(bits));
}

ProbabilityMatrix project_probabilities(Matrix const &raw, StableConstraintConfig const &cfg)
{
  cfg.validate_bounds();
  if (!raw.all_finite()) {
    throw DataError("project_probabilities: non-finite entry");
  }
  double const lo = cfg.p_min;
  double const hi = cfg.p_max;
  double const target = cfg.target_rate;
  auto const n = static_cast<double>(raw.size());

  auto const v = raw.values();
  bool const in_bounds = std::all_of(v.begin(), v.end(), [&](double x) { return x >= lo && x <= hi; });
  if (in_bounds && std::abs(raw.sum() / n - target) < cfg.epsilon) {
    return ProbabilityMatrix(raw);
  }

  Matrix base(raw.rows(), raw.cols());
  auto b = base.values();
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = std::clamp(v[i], lo, hi);
  }

  // f(s) = mean(clamp(base + s)) is monotone in s; bracket it and take
  // safeguarded Newton steps (the slope is the fraction of unclamped entries).
  auto evaluate = [&](double s, double &slope) {
    double total = 0.0;
    std::size_t free = 0;
    for (double x : b) {
      double const y = x + s;
      if (y <= lo) {
        total += lo;
      } else if (y >= hi) {
        total += hi;
      } else {
        total += y;
        ++free;
      }
    }
    slope = static_cast<double>(free) / n;
    return total / n;
  };

  double s_lo = lo - base.max();
  double s_hi = hi - base.min();
  double s = 0.0;
  double const tol = 1e-3 * cfg.epsilon;
  double err = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50; ++iter) {
    double slope = 0.0;
    double const mean = evaluate(s, slope);
    err = mean - target;
    if (std::abs(err) < tol) {
      break;
    }
    if (err > 0) {
      s_hi = s;
    } else {
      s_lo = s;
    }
    double next = slope > 0 ? s - err / slope : 0.5 * (s_lo + s_hi);
    if (!(next > s_lo && next < s_hi)) {
      next = 0.5 * (s_lo + s_hi);
    }
    s = next;
  }
  if (!(std::abs(err) < cfg.epsilon)) {
    throw NumericalError("project_probabilities: rate projection did not converge");
  }
  for (double &x : b) {
    x = std::clamp(x + s, lo, hi);
  }
  return ProbabilityMatrix(std::move(base));
}

ProbabilityMatrix project_probabilities(ProbabilityMatrix const &p, StableConstraintConfig const &cfg)
{
  return project_probabilities(p.probs(), cfg);
}

namespace {

constexpr double kQuadA = std::numbers::sqrt2 / 10.0;
constexpr double kQuadB = -std::numbers::sqrt2 / 2.0;
constexpr double kVertexR0 = -kQuadB / (2.0 * kQuadA); // 2.5

} // namespace

double probability_from_r0(double r0)
{
  return kQuadA * r0 * r0 + kQuadB * r0 + 1.0;
}

double r0_from_probability(double p_mean)
{
  if (!(p_mean > 0.0) || p_mean > 1.0 + 1e-12) {
    throw std::invalid_argument("r0_from_probability: mean probability must lie in (0, 1]");
  }
  double const c = 1.0 - std::min(p_mean, 1.0);
  double const disc = kQuadB * kQuadB - 4.0 * kQuadA * c;
  if (disc <= 0.0) {
    return kVertexR0;
  }
  double const r0 = (-kQuadB - std::sqrt(disc)) / (2.0 * kQuadA);
  return std::clamp(r0, 0.0, kVertexR0);
}

namespace {

struct Cell
{
  std::size_t row0, col0, rows, cols;
  std::size_t area() const { return rows * cols; }
};

struct Point
{
  int r, c;
};

double distance(Point a, Point b)
{
  return std::hypot(static_cast<double>(a.r - b.r), static_cast<double>(a.c - b.c));
}

constexpr int kAttemptsPerPoint = 10000;
constexpr double kRelaxFactor = 0.9;
constexpr int kMaxRounds = 400;

// Dart throwing inside one cell: a candidate is rejected when it lies closer
// than r to a placed point, or (after the first point) farther than 2r + 1 from
// every placed point. On failure the whole cell restarts with r relaxed.
std::vector<Point> place_points(Cell const &cell, std::size_t count, double r0, Rng &rng, double &r_used)
{
  r_used = r0;
  std::vector<Point> pts;
  if (count == 0) {
    return pts;
  }
  if (count == cell.area()) {
    for (std::size_t r = 0; r < cell.rows; ++r) {
      for (std::size_t c = 0; c < cell.cols; ++c) {
        pts.push_back({static_cast<int>(r), static_cast<int>(c)});
      }
    }
    return pts;
  }

  std::vector<std::uint8_t> taken(cell.area());
  double r = r0;
  for (int round = 0; round < kMaxRounds; ++round, r *= kRelaxFactor) {
    pts.clear();
    std::fill(taken.begin(), taken.end(), 0);
    double const lower2 = r * r;
    double const upper = 2.0 * r + 1.0;
    double const upper2 = upper * upper;
    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kAttemptsPerPoint; ++attempt) {
        std::size_t const idx = rng.index(cell.area());
        if (taken[idx]) {
          continue;
        }
        Point const cand{static_cast<int>(idx / cell.cols), static_cast<int>(idx % cell.cols)};
        double d2min = std::numeric_limits<double>::infinity();
        for (auto const &p : pts) {
          double const dr = cand.r - p.r;
          double const dc = cand.c - p.c;
          d2min = std::min(d2min, dr * dr + dc * dc);
        }
        if (!pts.empty() && (d2min < lower2 || d2min > upper2)) {
          continue;
        }
        taken[idx] = 1;
        pts.push_back(cand);
        placed = true;
        break;
      }
      ok = placed;
    }
    if (ok) {
      r_used = r;
      return pts;
    }
  }
  throw NumericalError("generate_stable_mask: point placement failed after relaxation");
}

void fill_distance_stats(std::vector<Point> const &pts, RegionReport &report)
{
  if (pts.size() < 2) {
    return;
  }
  double min_pair = std::numeric_limits<double>::infinity();
  double max_nn = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) {
        nn = std::min(nn, distance(pts[i], pts[j]));
      }
    }
    min_pair = std::min(min_pair, nn);
    max_nn = std::max(max_nn, nn);
  }
  report.min_dist = min_pair;
  report.max_nn_dist = max_nn;
}

// Largest-remainder apportionment of `total` points over cells with capacities.
std::vector<std::size_t> apportion(std::vector<double> const &quota, std::vector<std::size_t> const &capacity,
                                   std::size_t total)
{
  std::size_t const n = quota.size();
  std::vector<std::size_t> counts(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    counts[i] = std::min(capacity[i], static_cast<std::size_t>(std::floor(quota[i])));
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  // Cells capped below their quota leave points to hand out; keep cycling in
  // remainder order until the total matches.
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t i : order) {
      if (assigned == total) {
        break;
      }
      if (counts[i] < capacity[i]) {
        ++counts[i];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) {
      break;
    }
  }
  while (assigned > total) {
    // Quotas are rescaled to sum to the total, so this only absorbs rounding.
    for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
      if (counts[*it] > 0) {
        --counts[*it];
        --assigned;
      }
    }
  }
  return counts;
}

// Cell boundaries along one axis. One cell is centered on the DC index
// size/2; cells cut by the grid border are truncated.
std::vector<std::pair<std::size_t, std::size_t>> axis_spans(std::size_t size, std::size_t rs)
{
  std::size_t const lead = (size / 2 - rs / 2) % rs;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  if (lead > 0) {
    spans.emplace_back(0, lead);
  }
  for (std::size_t start = lead; start < size; start += rs) {
    spans.emplace_back(start, std::min(rs, size - start));
  }
  return spans;
}

} // namespace

std::pair<SamplingMask, std::vector<RegionReport>>
generate_stable_mask(ProbabilityMatrix const &p, StableConstraintConfig const &cfg)
{
  std::size_t const m = p.rows();
  std::size_t const n = p.cols();
  cfg.validate(m, n);
  auto const row_spans = axis_spans(m, cfg.region_size);
  auto const col_spans = axis_spans(n, cfg.region_size);
  std::size_t const cell_cols = col_spans.size();

  std::vector<Cell> cells;
  std::vector<double> mass;
  std::vector<std::size_t> capacity;
  for (auto const &[r0, rlen] : row_spans) {
    for (auto const &[c0, clen] : col_spans) {
      Cell const cell{r0, c0, rlen, clen};
      double s = 0.0;
      for (std::size_t r = 0; r < cell.rows; ++r) {
        for (std::size_t c = 0; c < cell.cols; ++c) {
          s += p(cell.row0 + r, cell.col0 + c);
        }
      }
      cells.push_back(cell);
      mass.push_back(s);
      capacity.push_back(cell.area());
    }
  }

  auto const total = static_cast<std::size_t>(std::llround(cfg.target_rate * static_cast<double>(m * n)));
  double const mass_total = std::accumulate(mass.begin(), mass.end(), 0.0);
  std::vector<double> quota(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    quota[i] = mass_total > 0 ? mass[i] * static_cast<double>(total) / mass_total
                              : static_cast<double>(cells[i].area() * total) / static_cast<double>(m * n);
  }
  auto const counts = apportion(quota, capacity, total);

  SamplingMask mask = SamplingMask::filled(m, n, false);
  std::vector<RegionReport> reports;
  reports.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Cell const &cell = cells[i];
    RegionReport report;
    report.region_row = i / cell_cols;
    report.region_col = i % cell_cols;
    report.p_mean = mass[i] / static_cast<double>(cell.area());
    report.count = counts[i];

    double const r0 = report.p_mean > 0.0 ? r0_from_probability(report.p_mean) : 2.5;
    Rng rng(mix_seed(cfg.seed, i));
    double r_used = r0;
    auto const pts = place_points(cell, counts[i], r0, rng, r_used);
    report.r0 = r_used;
    fill_distance_stats(pts, report);
    for (auto const &pt : pts) {
      mask.set(cell.row0 + static_cast<std::size_t>(pt.r), cell.col0 + static_cast<std::size_t>(pt.c), true);
    }
    reports.push_back(report);
  }
  return {std::move(mask), std::move(reports)};
}

MaskGradients mask_backward(TwoChannelGrid const &grad_out, TwoChannelGrid const &x_in, SamplingMask const &mask)
{
  require_same_shape(grad_out.channel0(), x_in.channel0(), "mask_backward");
  require_mask_shape(grad_out.rows(), grad_out.cols(), mask, "mask_backward");
  TwoChannelGrid grad_x(masked(grad_out.channel0(), mask), masked(grad_out.channel1(), mask));
  Matrix grad_p(mask.rows(), mask.cols());
  auto const g0 = grad_out.channel0().values();
  auto const g1 = grad_out.channel1().values();
  auto const x0 = x_in.channel0().values();
  auto const x1 = x_in.channel1().values();
  auto gp = grad_p.values();
  for (std::size_t i = 0; i < gp.size(); ++i) {
    gp[i] = g0[i] * x0[i] + g1[i] * x1[i];
  }
  return {std::move(grad_x), std::move(grad_p)};
}

void write_region_reports(std::filesystem::path const &path, std::vector<RegionReport> const &reports)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open for writing: " + path.string());
  }
  out << "region_row,region_col,p_mean,count,min_dist,max_nn_dist,r0\n";
  for (auto const &r : reports) {
    out << r.region_row << ',' << r.region_col << ',' << io::format_double(r.p_mean) << ',' << r.count << ','
        << io::format_double(r.min_dist) << ',' << io::format_double(r.max_nn_dist) << ','
        << io::format_double(r.r0) << '\n';
  }
}

} // namespace pupo
