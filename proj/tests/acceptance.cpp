// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Artifacts land under --out for inspection.
#include "oracles.hpp"

#include "pupo/baselines.hpp"
#include "pupo/fourier.hpp"
#include "pupo/io.hpp"
#include "pupo/metrics.hpp"
#include "pupo/pipeline.hpp"
#include "pupo/recnet.hpp"
#include "pupo/sampler.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

using namespace pupo;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(char const *format, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double max_abs(oracle::CGrid const &g)
{
  double best = 0.0;
  for (auto const &row : g) {
    for (auto const v : row) best = std::max(best, std::abs(v));
  }
  return best;
}

double max_abs_diff(oracle::CGrid const &a, oracle::CGrid const &b)
{
  double worst = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a[r].size(); ++c) worst = std::max(worst, std::abs(a[r][c] - b[r][c]));
  }
  return worst;
}

double energy(ComplexGrid const &g)
{
  double s = 0.0;
  for (std::size_t i = 0; i < g.real().size(); ++i) {
    s += g.real().values()[i] * g.real().values()[i] + g.imag().values()[i] * g.imag().values()[i];
  }
  return s;
}

std::vector<double> flat(Matrix const &m)
{
  return {m.values().begin(), m.values().end()};
}

// Toy data shared by the training and comparison criteria.
struct Toy
{
  Dataset train = make_phantom_set(32, 64, 1, Split::train);
  Dataset val = make_phantom_set(8, 64, 2, Split::val);
  Dataset test = make_phantom_set(32, 64, 3, Split::test);
};

Toy const &toy()
{
  static Toy const data;
  return data;
}

constexpr double kRates[] = {0.1, 0.2, 0.3, 0.4, 0.5};
constexpr std::size_t kMaskSize = 256;
constexpr std::uint64_t kSeed = 7;

// ---------------------------------------------------------------------------

Outcome dft_accuracy()
{
  auto const x8 = oracle::random_complex(8, 8, 1);
  auto const ref = oracle::brute_dft(oracle::to_cgrid(x8));
  double const fwd_err = max_abs_diff(oracle::to_cgrid(forward_2d(x8)), ref) / max_abs(ref);

  auto const x32 = oracle::random_complex(32, 32, 2);
  auto const k32 = forward_2d(x32);
  auto const back = oracle::to_cgrid(inverse_2d(k32));
  double const trip_err = max_abs_diff(back, oracle::to_cgrid(x32)) / max_abs(oracle::to_cgrid(x32));

  double const e_img = energy(x32);
  double const e_k = energy(k32) / (32.0 * 32.0);
  double const parseval = std::abs(e_img - e_k) / e_img;

  return {fwd_err < 1e-12 && trip_err < 1e-10 && parseval < 1e-9,
          fmt("forward %.2e, round trip %.2e, Parseval %.2e", fwd_err, trip_err, parseval)};
}

Outcome ift_gradient()
{
  // L = 1/2 || |IFT(K)| - y ||^2, the undersampling loss on the magnitude image
  std::size_t const n = 8;
  auto const k0 = oracle::random_complex(n, n, 11);
  Matrix const y = oracle::random_matrix(n, n, 12);
  std::vector<double> re = flat(k0.real());
  std::vector<double> im = flat(k0.imag());

  auto loss = [&] {
    auto const x = inverse_2d(ComplexGrid(Matrix(n, n, re), Matrix(n, n, im)));
    double s = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
      double const d = std::hypot(x.real().values()[i], x.imag().values()[i]) - y.values()[i];
      s += 0.5 * d * d;
    }
    return s;
  };

  auto const x = inverse_2d(k0);
  Matrix gr(n, n);
  Matrix gi(n, n);
  for (std::size_t i = 0; i < re.size(); ++i) {
    double const a = x.real().values()[i];
    double const b = x.imag().values()[i];
    double const mag = std::hypot(a, b);
    double const scale = (mag - y.values()[i]) / mag;
    gr.values()[i] = scale * a;
    gi.values()[i] = scale * b;
  }
  auto const analytic = ift_backward(ComplexGrid(gr, gi));
  auto const fd_re = oracle::central_differences(re, loss, 1e-6);
  auto const fd_im = oracle::central_differences(im, loss, 1e-6);
  double const err = std::max(oracle::max_relative_error(flat(analytic.real()), fd_re, 1e-8),
                              oracle::max_relative_error(flat(analytic.imag()), fd_im, 1e-8));
  return {err < 1e-5, fmt("max relative error %.2e", err)};
}

Outcome recnet_gradient()
{
  std::size_t const n = 16;
  auto params = RecNetParams::he_uniform(3, 16, 5);
  for (auto const &layer : params.layers()) {
    for (std::size_t o = 0; o < layer.out_channels; ++o) params.values()[layer.bias_offset + o] = 0.05;
  }
  RealImage const x(oracle::random_matrix(n, n, 6));
  RealImage const y(oracle::random_matrix(n, n, 7));

  auto fwd = recnet_forward(x, params);
  Matrix grad(n, n);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad.values()[i] = fwd.x_rec.pixels().values()[i] - y.pixels().values()[i];
  }
  auto const back = recnet_backward(fwd.tape, params, grad);

  std::vector<double> theta(params.values().begin(), params.values().end());
  auto loss = [&] {
    std::copy(theta.begin(), theta.end(), params.values().begin());
    return euclidean_loss(recnet_apply(x, params), y);
  };
  // cube root of machine epsilon balances truncation against roundoff; the
  // loss here is O(100), so a 1e-6 step leaves ~1e-3 noise on the smallest gradients
  double const step = std::cbrt(std::numeric_limits<double>::epsilon());
  auto const fd = oracle::central_differences(theta, loss, step);
  std::copy(theta.begin(), theta.end(), params.values().begin());
  double const err = oracle::max_relative_error(back.param_grads, fd, 1e-6);

  bool const identity = recnet_apply(x, RecNetParams(3, 16)) == x;
  return {err < 1e-4 && identity,
          fmt("%zu parameters, max relative error %.2e, zero net identity %s", theta.size(), err,
              identity ? "yes" : "no")};
}

// Variable-density probability matrix for the mask criteria: radially
// decaying, projected onto the rate.
ProbabilityMatrix radial_probability(std::size_t n, StableConstraintConfig const &cfg)
{
  Matrix raw(n, n);
  double const sigma = static_cast<double>(n) / 4.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double const d = std::hypot(static_cast<double>(r) - n / 2.0, static_cast<double>(c) - n / 2.0);
      raw(r, c) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  return project_probabilities(raw, cfg);
}

std::vector<fs::path> stable_masks(fs::path const &dir, std::string &detail, bool &pass)
{
  fs::create_directories(dir);
  std::vector<fs::path> files;
  pass = true;
  for (double rate : kRates) {
    auto const t0 = std::chrono::steady_clock::now();
    StableConstraintConfig const cfg{.target_rate = rate, .seed = kSeed};
    auto const p = radial_probability(kMaskSize, cfg);
    auto const [mask, reports] = generate_stable_mask(p, cfg);
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double const deviation = std::abs(rate_of(mask) - rate);
    std::size_t bad_min = 0;
    std::size_t bad_nn = 0;
    std::size_t cells = 0;
    auto const ranges = oracle::cell_ranges(kMaskSize, cfg.region_size);
    for (auto const &[r0_, r1] : ranges) {
      for (auto const &[c0, c1] : ranges) {
        std::vector<oracle::Point> pts;
        double mass = 0.0;
        for (std::size_t r = r0_; r < r1; ++r) {
          for (std::size_t c = c0; c < c1; ++c) {
            mass += p(r, c);
            if (mask(r, c)) pts.emplace_back(static_cast<double>(r), static_cast<double>(c));
          }
        }
        if (pts.size() < 2) continue;
        ++cells;
        double const r0 = oracle::quadratic_r0(mass / static_cast<double>((r1 - r0_) * (c1 - c0)));
        bad_min += oracle::all_pairs_min(pts) < r0 - 1.0 ? 1 : 0;
        bad_nn += oracle::max_nearest_neighbor(pts) > 2.0 * r0 + 1.0 ? 1 : 0;
      }
    }
    bool const same = generate_stable_mask(p, cfg).first == mask;
    bool const ok = deviation < 1e-3 && bad_min == 0 && bad_nn == 0 && same && secs < 30.0;
    pass = pass && ok;
    detail += fmt("%s%.1f: dev %.1e, %zu/%zu cells off, %.2fs%s", detail.empty() ? "" : "; ", rate, deviation,
                  bad_min + bad_nn, cells, secs, same ? "" : ", not reproducible");

    auto const file = dir / fmt("mask_%03d.txt", static_cast<int>(std::lround(rate * 1000)));
    io::write_mask(file, mask);
    files.push_back(file);
  }
  return files;
}

Outcome stable_mask_generation(fs::path const &out)
{
  Outcome o;
  stable_masks(out / "masks", o.detail, o.pass);
  return o;
}

Outcome r0_mapping()
{
  double const p1 = probability_from_r0(1.0);
  bool pass = std::abs(p1 - 0.434315) <= 1e-4 && std::abs(p1 - oracle::quadratic_p(1.0)) <= 1e-12;
  double worst = 0.0;
  for (double r0 : {1.0, 1.5, 2.0, 2.4}) {
    worst = std::max(worst, std::abs(r0_from_probability(probability_from_r0(r0)) - r0));
  }
  pass = pass && worst <= 1e-6;
  return {pass, fmt("p(1.0) = %.6f, worst round trip %.1e", p1, worst)};
}

Outcome bernoulli_rate()
{
  auto const p = ProbabilityMatrix::uniform(100, 100, 0.3);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    worst = std::max(worst, std::abs(rate_of(sample_bernoulli(p, seed)) - 0.3));
  }
  return {worst <= 0.0137, fmt("worst deviation over 10 seeds %.4f", worst)};
}

std::vector<std::string> const kBaselines{"line1d", "center_block", "uniform_grid", "gaussian", "poisson"};

ComparisonTable rate_sweep(fs::path const &csv)
{
  std::vector<double> const rates(std::begin(kRates), std::end(kRates));
  std::map<ArtifactKey, MethodArtifact> artifacts;
  for (double rate : rates) {
    StableConstraintConfig const cfg{.target_rate = rate, .seed = kSeed};
    auto const p = project_probabilities(ProbabilityMatrix::uniform(64, 64, rate), cfg);
    artifacts[{"probabilistic", rate}] = {generate_stable_mask(p, cfg).first, std::nullopt};
  }
  auto families = kBaselines;
  families.emplace_back("probabilistic");
  auto table = compare_methods(toy().test, rates, families, artifacts);
  fs::create_directories(csv.parent_path());
  write_comparison_csv(csv, table);
  return table;
}

Outcome psnr_monotone_in_rate(fs::path const &out)
{
  auto const table = rate_sweep(out / "sweep" / "comparison.csv");
  bool pass = true;
  std::string detail;
  for (auto const &family : table.families) {
    bool rising = true;
    double prev = -1e300;
    std::string row;
    for (double rate : table.rates) {
      double const v = *table.at(rate, family).psnr_u;
      rising = rising && v > prev;
      prev = v;
      row += fmt(" %.2f", v);
    }
    pass = pass && rising;
    detail += fmt("%s%s%s%s", detail.empty() ? "" : ";", family.c_str(), row.c_str(), rising ? "" : " (not rising)");
  }
  return {pass, detail};
}

TrainConfig toy_train_config(double rate)
{
  TrainConfig cfg;
  cfg.constraint.target_rate = rate;
  cfg.constraint.seed = kSeed;
  cfg.recnet_depth = 5;
  cfg.max_epochs = 50;
  cfg.seed = kSeed;
  cfg.threads = 1;
  return cfg;
}

TrainResult train_toy(double rate, fs::path const &dir)
{
  fs::remove_all(dir);
  return train(toy().train, toy().val, toy_train_config(rate), TrainOptions{.out_dir = dir});
}

struct Learned
{
  std::map<double, TrainResult> runs;
};

Outcome joint_training(fs::path const &out, Learned &learned)
{
  auto const t0 = std::chrono::steady_clock::now();
  auto const &res = learned.runs.emplace(0.3, train_toy(0.3, out / "train_030")).first->second;
  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t ups = 0;
  for (std::size_t i = 1; i < res.log.size(); ++i) ups += res.log[i].l_joint > res.log[i - 1].l_joint ? 1 : 0;
  std::size_t const steps = res.log.size() - 1;
  bool const overall = res.log.back().l_joint < res.log.front().l_joint;
  bool const few_ups = static_cast<double>(ups) <= 0.05 * static_cast<double>(steps);

  auto const cfg = toy_train_config(0.3);
  auto const p0 = project_probabilities(ProbabilityMatrix::uniform(64, 64, 0.3), cfg.constraint);
  double const initial_u = evaluate(toy().test, generate_stable_mask(p0, cfg.constraint).first).mean_psnr_u;
  double const final_rec = *evaluate(toy().test, res.mask, &res.params).mean_psnr_rec;
  bool const gain = final_rec >= initial_u + 1.0;

  return {overall && few_ups && gain && secs < 900.0,
          fmt("L_joint %.4f -> %.4f, %zu of %zu steps increase; test PSNR_u initial %.2f, final rec %.2f; %.0fs",
              res.log.front().l_joint, res.log.back().l_joint, ups, steps, initial_u, final_rec, secs)};
}

EvalReport baseline_report(std::string const &family, double rate)
{
  auto const mask = make_baseline(baseline_for({}, parse_family(family), rate), 64, 64);
  return evaluate(toy().test, mask);
}

Outcome learned_beats_random(fs::path const &out, Learned &learned)
{
  if (!learned.runs.contains(0.2)) learned.runs.emplace(0.2, train_toy(0.2, out / "train_020"));
  bool pass = true;
  std::string detail;
  for (double rate : {0.2, 0.3}) {
    auto const &res = learned.runs.at(rate);
    auto const mine = evaluate(toy().test, res.mask);
    detail += fmt("%s%.1f: learned %.2f", detail.empty() ? "" : "; ", rate, mine.mean_psnr_u);
    for (std::string const family : {"gaussian", "poisson"}) {
      auto const other = baseline_report(family, rate);
      bool const matched = std::abs(other.realized_rate - mine.realized_rate) <= 1e-3;
      pass = pass && matched && mine.mean_psnr_u >= other.mean_psnr_u;
      detail += fmt(", %s %.2f%s", family.c_str(), other.mean_psnr_u, matched ? "" : " (rate mismatch)");
    }
  }
  return {pass, detail};
}

Outcome comparison_ordering(fs::path const &out, Learned const &learned)
{
  constexpr double tie = 0.3;
  std::vector<double> const rates{0.2, 0.3};
  std::map<ArtifactKey, MethodArtifact> artifacts;
  for (double rate : rates) artifacts[{"probabilistic", rate}] = {learned.runs.at(rate).mask, std::nullopt};
  auto families = kBaselines;
  families.emplace_back("probabilistic");
  auto const table = compare_methods(toy().test, rates, families, artifacts);
  write_comparison_csv(out / "comparison.csv", table);

  bool pass = true;
  std::string detail;
  for (double rate : rates) {
    auto u = [&](char const *f) { return *table.at(rate, f).psnr_u; };
    std::vector<std::string> broken;
    if (!(u("line1d") < u("center_block"))) broken.emplace_back("line1d<center_block");
    if (!(u("center_block") < u("uniform_grid"))) broken.emplace_back("center_block<uniform_grid");
    if (!(u("uniform_grid") <= u("gaussian") + tie)) broken.emplace_back("uniform_grid<=gaussian");
    if (!(std::abs(u("gaussian") - u("poisson")) <= tie)) broken.emplace_back("gaussian~poisson");
    if (!(std::max(u("gaussian"), u("poisson")) <= u("probabilistic") + tie)) broken.emplace_back("random<=probabilistic");
    pass = pass && broken.empty();
    std::string row;
    for (auto const &f : families) row += fmt(" %s=%.2f", f.c_str(), u(f.c_str()));
    std::string why;
    for (auto const &b : broken) why += " " + b;
    detail += fmt("%s%.1f:%s%s%s", detail.empty() ? "" : "; ", rate, row.c_str(), broken.empty() ? "" : " | broken:",
                  why.c_str());
  }
  return {pass, detail};
}

std::vector<std::pair<fs::path, std::string>> files_under(fs::path const &dir)
{
  std::vector<std::pair<fs::path, std::string>> out;
  for (auto const &e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome reruns_identical(fs::path const &out)
{
  auto const again = out / "rerun";
  fs::remove_all(again);
  std::string ignored;
  bool ok = false;
  stable_masks(again / "masks", ignored, ok);
  rate_sweep(again / "sweep" / "comparison.csv");
  train_toy(0.3, again / "train_030");

  std::vector<std::string> differ;
  std::size_t compared = 0;
  for (char const *sub : {"masks", "sweep", "train_030"}) {
    auto const a = files_under(out / sub);
    auto const b = files_under(again / sub);
    compared += a.size();
    if (a.empty() || a != b) differ.emplace_back(sub);
  }
  std::string why;
  for (auto const &d : differ) why += " " + d;
  return {differ.empty(), fmt("%zu files compared%s%s", compared, differ.empty() ? "" : ", differing:", why.c_str())};
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"acceptance criteria"};
  fs::path out = "acceptance_out";
  app.add_option("--out", out, "artifact directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  Learned learned;
  std::vector<std::pair<std::string, std::function<Outcome()>>> const criteria{
    {"DFT accuracy, round trip and Parseval", dft_accuracy},
    {"IFT gradient against finite differences", ift_gradient},
    {"RecNet gradient and zero-parameter identity", recnet_gradient},
    {"stable mask rate, distances and determinism", [&] { return stable_mask_generation(out); }},
    {"r0 to probability mapping", r0_mapping},
    {"Bernoulli sampling rate", bernoulli_rate},
    {"PSNR_u rises with the rate for every mask family", [&] { return psnr_monotone_in_rate(out); }},
    {"joint training smoke test", [&] { return joint_training(out, learned); }},
    {"learned mask beats gaussian and poisson", [&] { return learned_beats_random(out, learned); }},
    {"comparison ordering", [&] { return comparison_ordering(out, learned); }},
    {"identical seeds give identical artifacts", [&] { return reruns_identical(out); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto const t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (std::exception const &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
