#include "pupo/data.hpp"

#include "pupo/fourier.hpp"
#include "pupo/io.hpp"
#include "pupo/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pupo {

std::string_view split_name(Split split) noexcept
{
  switch (split) {
  case Split::train:
    return "train";
  case Split::val:
    return "val";
  case Split::test:
    return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name)
{
  for (auto s : {Split::train, Split::val, Split::test}) {
    if (split_name(s) == name) {
      return s;
    }
  }
  throw DataError("unknown split tag: " + std::string(name));
}

std::pair<std::size_t, std::size_t> Dataset::dims() const
{
  if (items.empty()) {
    throw ShapeError("dataset '" + name + "' is empty");
  }
  std::size_t const rows = items.front().image.rows();
  std::size_t const cols = items.front().image.cols();
  for (auto const &item : items) {
    if (item.image.rows() != rows || item.image.cols() != cols) {
      throw ShapeError("dataset '" + name + "' mixes image sizes");
    }
  }
  return {rows, cols};
}

RealImage normalize(Matrix const &raw)
{
  if (!raw.all_finite()) {
    throw DataError("normalize: non-finite pixel");
  }
  if (raw.empty()) {
    return RealImage(raw);
  }
  double const lo = raw.min();
  double const hi = raw.max();
  Matrix out(raw.rows(), raw.cols(), 0.0);
  if (hi > lo) {
    auto src = raw.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = std::clamp((src[i] - lo) / (hi - lo), 0.0, 1.0);
    }
  }
  return RealImage(std::move(out));
}

std::optional<std::pair<std::ptrdiff_t, std::ptrdiff_t>> centroid_shift(RealImage const &image)
{
  constexpr double kForeground = 0.05;
  double mass = 0.0;
  double sr = 0.0;
  double sc = 0.0;
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) {
      double const v = image(r, c);
      if (v > kForeground) {
        mass += v;
        sr += v * static_cast<double>(r);
        sc += v * static_cast<double>(c);
      }
    }
  }
  if (mass == 0.0) {
    return std::nullopt;
  }
  auto const shift = [](double target, double centroid) {
    return static_cast<std::ptrdiff_t>(std::floor(target - centroid + 0.5));
  };
  return std::pair{shift(static_cast<double>(image.rows() / 2), sr / mass),
                   shift(static_cast<double>(image.cols() / 2), sc / mass)};
}

RealImage center_translate(RealImage const &image)
{
  auto const shift = centroid_shift(image);
  if (!shift || (shift->first == 0 && shift->second == 0)) {
    return image;
  }
  auto const h = static_cast<std::ptrdiff_t>(image.rows());
  auto const w = static_cast<std::ptrdiff_t>(image.cols());
  Matrix out(image.rows(), image.cols(), 0.0);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    std::ptrdiff_t const sr = r - shift->first;
    if (sr < 0 || sr >= h) {
      continue;
    }
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      std::ptrdiff_t const sc = c - shift->second;
      if (sc >= 0 && sc < w) {
        out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          image(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
      }
    }
  }
  return RealImage(std::move(out));
}

namespace {

// Bilinear sample with zero outside the grid.
double sample_zero(Matrix const &m, double y, double x)
{
  double const fy = std::floor(y);
  double const fx = std::floor(x);
  double const ty = y - fy;
  double const tx = x - fx;
  auto const y0 = static_cast<std::ptrdiff_t>(fy);
  auto const x0 = static_cast<std::ptrdiff_t>(fx);
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(m.rows()) || c >= static_cast<std::ptrdiff_t>(m.cols())) {
      return 0.0;
    }
    return m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  double v = 0.0;
  if ((1 - ty) * (1 - tx) != 0.0) v += (1 - ty) * (1 - tx) * at(y0, x0);
  if ((1 - ty) * tx != 0.0) v += (1 - ty) * tx * at(y0, x0 + 1);
  if (ty * (1 - tx) != 0.0) v += ty * (1 - tx) * at(y0 + 1, x0);
  if (ty * tx != 0.0) v += ty * tx * at(y0 + 1, x0 + 1);
  return v;
}

} // namespace

RealImage rotate(RealImage const &image, double degrees)
{
  double const turns = degrees / 360.0;
  if (turns == std::floor(turns)) {
    return image;
  }
  double const theta = degrees * std::numbers::pi / 180.0;
  double const cs = std::cos(theta);
  double const sn = std::sin(theta);
  double const cy = (static_cast<double>(image.rows()) - 1.0) / 2.0;
  double const cx = (static_cast<double>(image.cols()) - 1.0) / 2.0;
  Matrix out(image.rows(), image.cols(), 0.0);
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) {
      // Inverse map: output pixel back to its source location.
      double const dy = static_cast<double>(r) - cy;
      double const dx = static_cast<double>(c) - cx;
      double const sy = cy + cs * dy - sn * dx;
      double const sx = cx + sn * dy + cs * dx;
      out(r, c) = std::clamp(sample_zero(image.pixels(), sy, sx), 0.0, 1.0);
    }
  }
  return RealImage(std::move(out));
}

std::vector<RealImage> rotate_random(RealImage const &image, AugmentSpec const &spec)
{
  Rng rng(spec.rotation_seed);
  std::vector<RealImage> out;
  out.reserve(spec.rotations_per_image);
  for (std::size_t k = 0; k < spec.rotations_per_image; ++k) {
    out.push_back(rotate(image, 360.0 * rng.uniform()));
  }
  return out;
}

ComplexGrid to_kspace(RealImage const &image)
{
  return forward_2d(ComplexGrid::from_real(image.pixels()));
}

RealImage resize(RealImage const &image, std::size_t rows, std::size_t cols)
{
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("resize: target dimensions must be positive");
  }
  if (rows == image.rows() && cols == image.cols()) {
    return image;
  }
  Matrix const &src = image.pixels();
  double const ry = static_cast<double>(src.rows()) / static_cast<double>(rows);
  double const rx = static_cast<double>(src.cols()) / static_cast<double>(cols);
  double const ymax = static_cast<double>(src.rows()) - 1.0;
  double const xmax = static_cast<double>(src.cols()) - 1.0;
  Matrix out(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double const y = std::clamp((static_cast<double>(r) + 0.5) * ry - 0.5, 0.0, ymax);
    auto const y0 = static_cast<std::size_t>(y);
    std::size_t const y1 = std::min(y0 + 1, src.rows() - 1);
    double const ty = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      double const x = std::clamp((static_cast<double>(c) + 0.5) * rx - 0.5, 0.0, xmax);
      auto const x0 = static_cast<std::size_t>(x);
      std::size_t const x1 = std::min(x0 + 1, src.cols() - 1);
      double const tx = x - static_cast<double>(x0);
      double const top = (1 - tx) * src(y0, x0) + tx * src(y0, x1);
      double const bottom = (1 - tx) * src(y1, x0) + tx * src(y1, x1);
      out(r, c) = (1 - ty) * top + ty * bottom;
    }
  }
  return RealImage(std::move(out));
}

namespace {

struct Ellipse
{
  double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan head (higher contrast variant).
constexpr std::array<Ellipse, 10> kSheppLogan{{
  {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
  {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
  {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
  {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
  {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
  {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
  {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
  {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
  {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
  {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

} // namespace

RealImage make_phantom(std::size_t size, std::uint64_t seed)
{
  if (size == 0) {
    throw std::invalid_argument("phantom size must be positive");
  }
  Rng rng(seed);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

  double const scale = between(0.75, 0.95);
  double const tilt = between(-20.0, 20.0) * std::numbers::pi / 180.0;
  double const ox = between(-0.05, 0.05);
  double const oy = between(-0.05, 0.05);

  std::vector<Ellipse> shapes;
  for (std::size_t k = 0; k < kSheppLogan.size(); ++k) {
    Ellipse e = kSheppLogan[k];
    if (k >= 2) {
      e.intensity *= between(0.7, 1.3);
      e.x0 += between(-0.03, 0.03);
      e.y0 += between(-0.03, 0.03);
    }
    shapes.push_back(e);
  }
  std::size_t const extra = 1 + rng.index(4);
  for (std::size_t k = 0; k < extra; ++k) {
    double const rad = between(0.0, 0.45);
    double const ang = between(0.0, 2.0 * std::numbers::pi);
    shapes.push_back({between(0.1, 0.3) * (rng.uniform() < 0.5 ? -1.0 : 1.0), between(0.03, 0.12),
                      between(0.03, 0.12), rad * std::cos(ang), rad * std::sin(ang), between(0.0, 180.0)});
  }

  constexpr int kSuper = 2;
  double const n = static_cast<double>(size);
  double const ct = std::cos(tilt);
  double const st = std::sin(tilt);
  Matrix raw(size, size, 0.0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          double const px = ((static_cast<double>(c) + (sx + 0.5) / kSuper) / n) * 2.0 - 1.0;
          double const py = 1.0 - ((static_cast<double>(r) + (sy + 0.5) / kSuper) / n) * 2.0;
          // Head frame: undo offset, tilt and scale.
          double const hx = (ct * (px - ox) + st * (py - oy)) / scale;
          double const hy = (-st * (px - ox) + ct * (py - oy)) / scale;
          double v = 0.0;
          for (auto const &e : shapes) {
            double const phi = e.phi_deg * std::numbers::pi / 180.0;
            double const dx = hx - e.x0;
            double const dy = hy - e.y0;
            double const u = (std::cos(phi) * dx + std::sin(phi) * dy) / e.a;
            double const w = (-std::sin(phi) * dx + std::cos(phi) * dy) / e.b;
            if (u * u + w * w <= 1.0) {
              v += e.intensity;
            }
          }
          acc += std::max(0.0, v);
        }
      }
      raw(r, c) = acc / (kSuper * kSuper);
    }
  }
  return normalize(raw);
}

Dataset make_phantom_set(std::size_t count, std::size_t size, std::uint64_t seed, Split split)
{
  if (count == 0) {
    throw std::invalid_argument("phantom count must be at least 1");
  }
  Dataset data;
  data.name = "phantoms-" + std::to_string(seed);
  data.split = split;
  data.items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t const sub = mix_seed(seed, i);
    RealImage image = make_phantom(size, sub);
    ComplexGrid k = to_kspace(image);
    data.items.push_back({std::move(image), std::move(k), "phantom seed=" + std::to_string(sub)});
  }
  return data;
}

Dataset augment(Dataset const &data, AugmentSpec const &spec)
{
  Dataset out;
  out.name = data.name + "-aug";
  out.split = data.split;
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    auto const &item = data.items[i];
    RealImage base = spec.center_translation ? center_translate(item.image) : item.image;
    AugmentSpec local = spec;
    local.rotation_seed = mix_seed(spec.rotation_seed, i);
    auto rotations = rotate_random(base, local);
    ComplexGrid k = to_kspace(base);
    out.items.push_back({std::move(base), std::move(k), item.source});
    for (std::size_t j = 0; j < rotations.size(); ++j) {
      ComplexGrid kr = to_kspace(rotations[j]);
      out.items.push_back({std::move(rotations[j]), std::move(kr), item.source + " rot" + std::to_string(j)});
    }
  }
  return out;
}

RealImage load_image(std::filesystem::path const &path)
{
  auto const ext = path.extension().string();
  if (ext == ".pgm") {
    return normalize(io::read_pgm(path));
  }
  if (io::is_complex_file(path)) {
    return normalize(magnitude(inverse_2d(io::read_complex(path))));
  }
  return normalize(io::read_matrix(path));
}

std::map<Split, Dataset> load_manifest(std::filesystem::path const &manifest, std::optional<std::size_t> size)
{
  std::ifstream in(manifest);
  if (!in) {
    throw DataError("cannot open manifest: " + manifest.string());
  }
  auto const base = manifest.parent_path();
  std::map<Split, Dataset> sets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string tag;
    std::string file;
    if (!(fields >> tag)) {
      continue;
    }
    if (!(fields >> file)) {
      throw DataError(manifest.string() + ":" + std::to_string(lineno) + ": expected '<split> <path>'");
    }
    Split const split = parse_split(tag);
    std::filesystem::path p(file);
    if (p.is_relative()) {
      p = base / p;
    }
    RealImage image = load_image(p);
    if (size) {
      image = resize(image, *size, *size);
    }
    ComplexGrid k = to_kspace(image);
    auto &set = sets[split];
    set.name = manifest.stem().string() + "-" + std::string(split_name(split));
    set.split = split;
    set.items.push_back({std::move(image), std::move(k), p.string()});
  }
  for (auto const &[split, set] : sets) {
    (void)set.dims();
  }
  return sets;
}

void write_dataset(std::filesystem::path const &dir, std::filesystem::path const &manifest, Dataset const &data)
{
  std::filesystem::create_directories(dir);
  std::ofstream out(manifest, std::ios::app);
  if (!out) {
    throw DataError("cannot open manifest for writing: " + manifest.string());
  }
  auto const rel_base = std::filesystem::absolute(manifest).parent_path();
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    auto const file = dir / (std::string(split_name(data.split)) + "_" + std::to_string(i) + ".img");
    io::write_image(file, data.items[i].image);
    out << split_name(data.split) << ' '
        << std::filesystem::relative(std::filesystem::absolute(file), rel_base).generic_string() << '\n';
  }
}

std::vector<std::vector<std::size_t>> batch_order(std::size_t n, std::size_t batch_size, std::uint64_t seed)
{
  if (batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(i),
                         perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  }
  return batches;
}

} // namespace pupo
