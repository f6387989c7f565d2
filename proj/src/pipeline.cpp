#include "pupo/pipeline.hpp"

#include "pupo/config.hpp"
#include "pupo/fourier.hpp"
#include "pupo/io.hpp"
#include "pupo/metrics.hpp"
#include "pupo/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace pupo {

std::string_view optimizer_name(ProbOptimizer opt) noexcept
{
  return opt == ProbOptimizer::adam ? "adam" : "shared_rms";
}

ProbOptimizer parse_optimizer(std::string_view name)
{
  if (name == "adam") {
    return ProbOptimizer::adam;
  }
  if (name == "shared_rms") {
    return ProbOptimizer::shared_rms;
  }
  throw std::invalid_argument("unknown probability optimizer: " + std::string(name));
}

double TrainConfig::lr_at(std::size_t epoch) const
{
  double const steps = static_cast<double>(epoch / decay_step);
  return std::max(min_lr, initial_lr * std::pow(lr_decay_factor, -steps));
}

void TrainConfig::validate() const
{
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0)) {
    throw std::invalid_argument("lambda values must be non-negative");
  }
  if (batch_size == 0 || decay_step == 0 || recnet_channels == 0) {
    throw std::invalid_argument("batch size, decay step and channel count must be positive");
  }
  if (!(initial_lr > 0.0 && lr_decay_factor > 0.0 && min_lr > 0.0 && weight_decay >= 0.0 && prob_lr >= 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1) and eps must be positive");
  }
  constraint.validate_bounds();
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes its
// own slot, so results do not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F &&fn)
{
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
              error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

// Zero-filled magnitude image for a mask already in the unshifted frame.
Matrix zero_filled(ComplexGrid const &k, SamplingMask const &mask_unshifted)
{
  return magnitude(inverse_2d(merge_channels(apply_mask(split_channels(k), mask_unshifted))));
}

void require_mask_dims(ComplexGrid const &k, SamplingMask const &mask)
{
  if (k.rows() != mask.rows() || k.cols() != mask.cols()) {
    throw ShapeError("mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) + " but data is " +
                     std::to_string(k.rows()) + "x" + std::to_string(k.cols()));
  }
}

struct ItemGradients
{
  double l_ift = 0.0;
  double l_rec = 0.0;
  std::vector<double> grad_params;
  Matrix grad_p; // unshifted frame
};

ItemGradients item_gradients(DataItem const &item, SamplingMask const &mask_unshifted, RecNetParams const &params,
                             double lambda1, double lambda2)
{
  require_mask_dims(item.kspace, mask_unshifted);
  Matrix const &y = item.image.pixels();
  TwoChannelGrid const x_in = split_channels(item.kspace);
  ComplexGrid const z = inverse_2d(merge_channels(apply_mask(x_in, mask_unshifted)));
  Matrix const xu = magnitude(z);
  ForwardResult fwd = recnet_forward(RealImage(xu), params);

  ItemGradients out;
  out.l_ift = euclidean_loss(xu, y);
  out.l_rec = euclidean_loss(fwd.x_rec.pixels(), y);

  Matrix g_rec(y.rows(), y.cols());
  {
    auto xr = fwd.x_rec.pixels().values();
    auto yv = y.values();
    auto gv = g_rec.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      gv[i] = lambda2 * (xr[i] - yv[i]);
    }
  }
  BackwardResult back = recnet_backward(fwd.tape, params, g_rec);
  out.grad_params = std::move(back.param_grads);

  // Through |z|: d|z|/dRe = Re/|z|, d|z|/dIm = Im/|z|; zero at the origin.
  Matrix gre(y.rows(), y.cols());
  Matrix gim(y.rows(), y.cols());
  {
    auto gx = back.grad_x_u.values();
    auto xv = xu.values();
    auto yv = y.values();
    auto zr = z.real().values();
    auto zi = z.imag().values();
    auto pr = gre.values();
    auto pi = gim.values();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double const g = gx[i] + lambda1 * (xv[i] - yv[i]);
      if (xv[i] > 0.0) {
        pr[i] = g * zr[i] / xv[i];
        pi[i] = g * zi[i] / xv[i];
      }
    }
  }
  ComplexGrid const gk = ift_backward(ComplexGrid(std::move(gre), std::move(gim)));
  out.grad_p = mask_backward(split_channels(gk), x_in, mask_unshifted).grad_p;
  return out;
}

TrainLogRow evaluate_row(Dataset const &train_set, Dataset const &val_set, SamplingMask const &mask,
                         RecNetParams const &params, TrainConfig const &cfg, std::size_t epoch, double lr)
{
  SamplingMask const mask_u = inverse_center_shift(mask);
  std::vector<double> l_ift(train_set.size());
  std::vector<double> l_rec(train_set.size());
  parallel_for(train_set.size(), cfg.threads, [&](std::size_t i) {
    auto const &item = train_set.items[i];
    RealImage xu(zero_filled(item.kspace, mask_u));
    RealImage xr = recnet_apply(xu, params);
    l_ift[i] = euclidean_loss(xu, item.image);
    l_rec[i] = euclidean_loss(xr, item.image);
  });
  TrainLogRow row;
  row.epoch = epoch;
  row.lr = lr;
  for (std::size_t i = 0; i < l_ift.size(); ++i) {
    row.l_ift += l_ift[i];
    row.l_rec += l_rec[i];
  }
  double const n = static_cast<double>(train_set.size());
  row.l_ift /= n;
  row.l_rec /= n;
  row.l_joint = cfg.lambda1 * row.l_ift + cfg.lambda2 * row.l_rec;
  EvalReport const val = evaluate(val_set, mask, &params, cfg.threads);
  row.val_psnr_u = val.mean_psnr_u;
  row.val_psnr_rec = val.mean_psnr_rec.value_or(val.mean_psnr_u);
  row.realized_rate = val.realized_rate;
  return row;
}

void prob_step(ProbabilityMatrix &p, ProbOptimizerState &state, Matrix const &grad, TrainConfig const &cfg,
               double lr)
{
  auto const g = grad.values();
  state.step += 1;
  double const t = static_cast<double>(state.step);
  double const c1 = 1.0 - std::pow(cfg.beta1, t);
  double const c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    state.first[i] = cfg.beta1 * state.first[i] + (1.0 - cfg.beta1) * g[i];
  }
  if (cfg.prob_optimizer == ProbOptimizer::shared_rms) {
    double sq = 0.0;
    for (double v : g) {
      sq += v * v;
    }
    state.second[0] = cfg.beta2 * state.second[0] + (1.0 - cfg.beta2) * sq / static_cast<double>(g.size());
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      state.second[i] = cfg.beta2 * state.second[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    }
  }
  Matrix raw = p.probs();
  auto rv = raw.values();
  for (std::size_t i = 0; i < rv.size(); ++i) {
    double const v = state.second.size() == 1 ? state.second[0] : state.second[i];
    rv[i] -= lr * (state.first[i] / c1) / (std::sqrt(v / c2) + cfg.adam_eps);
  }
  p = project_probabilities(raw, cfg.constraint);
}

constexpr std::array<char, 8> kStateTag{'P', 'U', 'P', 'O', 'S', 'T', 'A', 'T'};

void put_row(std::ostream &out, TrainLogRow const &row)
{
  io::put_u64(out, row.epoch);
  std::array<double, 7> const v{row.lr, row.l_ift, row.l_rec, row.l_joint, row.val_psnr_u, row.val_psnr_rec,
                                row.realized_rate};
  io::put_f64s(out, v);
}

TrainLogRow get_row(std::istream &in)
{
  TrainLogRow row;
  row.epoch = io::get_u64(in);
  auto const v = io::get_f64s(in, 7);
  row.lr = v[0];
  row.l_ift = v[1];
  row.l_rec = v[2];
  row.l_joint = v[3];
  row.val_psnr_u = v[4];
  row.val_psnr_rec = v[5];
  row.realized_rate = v[6];
  return row;
}

// Snapshot used to check that a resumed run uses the same settings. Threads
// and the epoch budget may change between runs without affecting results.
std::string resume_signature(TrainConfig cfg)
{
  cfg.threads = 1;
  cfg.max_epochs = 0;
  return to_config(cfg).to_text();
}

void save_state(std::filesystem::path const &dir, TrainResult const &state, TrainConfig const &cfg)
{
  namespace fs = std::filesystem;
  fs::path const tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  io::write_probability(tmp / "probability.txt", state.probability);
  io::write_mask(tmp / "mask.txt", state.mask);
  save_checkpoint(tmp / "recnet.bin", state.params);
  write_train_log(tmp / "train_log.csv", state.log);
  to_config(cfg).save(tmp / "config.cfg");
  {
    std::ofstream out(tmp / "state.bin", std::ios::binary);
    out.write(kStateTag.data(), kStateTag.size());
    io::put_u64(out, state.epochs_done);
    put_row(out, state.initial);
    for (auto const &row : state.log) {
      put_row(out, row);
    }
    io::put_u64(out, state.prob_state.step);
    io::put_u64(out, state.prob_state.first.size());
    io::put_f64s(out, state.prob_state.first);
    io::put_u64(out, state.prob_state.second.size());
    io::put_f64s(out, state.prob_state.second);
    if (!out) {
      throw DataError("cannot write training state under " + tmp.string());
    }
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

TrainResult load_state(std::filesystem::path const &dir, TrainConfig const &cfg)
{
  if (resume_signature(train_config_from(ConfigFile::load(dir / "config.cfg"))) != resume_signature(cfg)) {
    throw std::invalid_argument("checkpoint in " + dir.string() + " was written with a different configuration");
  }
  std::ifstream in(dir / "state.bin", std::ios::binary);
  std::array<char, 8> tag{};
  in.read(tag.data(), tag.size());
  if (!in || tag != kStateTag) {
    throw DataError("not a training state file: " + (dir / "state.bin").string());
  }
  std::size_t const done = io::get_u64(in);
  TrainLogRow const initial = get_row(in);
  std::vector<TrainLogRow> log;
  for (std::size_t i = 0; i < done; ++i) {
    log.push_back(get_row(in));
  }
  ProbOptimizerState ps;
  ps.step = io::get_u64(in);
  ps.first = io::get_f64s(in, io::get_u64(in));
  ps.second = io::get_f64s(in, io::get_u64(in));
  if (!in) {
    throw DataError("truncated training state: " + (dir / "state.bin").string());
  }
  return TrainResult{io::read_probability(dir / "probability.txt"),
                     io::read_mask(dir / "mask.txt"),
                     load_checkpoint(dir / "recnet.bin"),
                     std::move(ps),
                     std::move(log),
                     initial,
                     done};
}

} // namespace

RealImage undersampled_image(ComplexGrid const &k, SamplingMask const &mask)
{
  require_mask_dims(k, mask);
  return RealImage(zero_filled(k, inverse_center_shift(mask)));
}

double joint_loss(RealImage const &x_u, RealImage const &x_rec, RealImage const &y, double lambda1, double lambda2)
{
  return lambda1 * euclidean_loss(x_u, y) + lambda2 * euclidean_loss(x_rec, y);
}

JointGradients joint_gradients(DataItem const &item, SamplingMask const &mask, RecNetParams const &params,
                               double lambda1, double lambda2)
{
  require_mask_dims(item.kspace, mask);
  ItemGradients g = item_gradients(item, inverse_center_shift(mask), params, lambda1, lambda2);
  return {g.l_ift, g.l_rec, std::move(g.grad_params), center_shift(g.grad_p)};
}

TrainResult train(Dataset const &train_set, Dataset const &val_set, TrainConfig const &cfg,
                  TrainOptions const &options)
{
  cfg.validate();
  auto const [rows, cols] = train_set.dims();
  if (val_set.dims() != std::pair{rows, cols}) {
    throw ShapeError("validation images differ in size from training images");
  }
  cfg.constraint.validate(rows, cols);

  std::optional<std::filesystem::path> ckpt_dir;
  if (options.out_dir) {
    ckpt_dir = *options.out_dir / "checkpoint";
  }

  TrainResult state{ProbabilityMatrix{}, SamplingMask{}, RecNetParams(cfg.recnet_depth, cfg.recnet_channels), {}, {},
                    {}, 0};
  std::vector<RegionReport> reports;
  if (options.resume && ckpt_dir && std::filesystem::exists(*ckpt_dir / "state.bin")) {
    state = load_state(*ckpt_dir, cfg);
  } else {
    state.probability =
      project_probabilities(ProbabilityMatrix::uniform(rows, cols, cfg.target_rate()), cfg.constraint);
    state.params = RecNetParams::he_uniform(cfg.recnet_depth, cfg.recnet_channels, mix_seed(cfg.seed, 0));
    std::size_t const second = cfg.prob_optimizer == ProbOptimizer::shared_rms ? 1 : rows * cols;
    state.prob_state = {std::vector<double>(rows * cols, 0.0), std::vector<double>(second, 0.0), 0};
    state.mask = generate_stable_mask(state.probability, cfg.constraint).first;
    state.initial = evaluate_row(train_set, val_set, state.mask, state.params, cfg, 0, cfg.lr_at(0));
  }

  std::size_t const last = std::min(cfg.max_epochs, options.stop_after.value_or(cfg.max_epochs));
  AdamConfig adam{.lr = 0.0, .beta1 = cfg.beta1, .beta2 = cfg.beta2, .eps = cfg.adam_eps,
                  .weight_decay = cfg.weight_decay};
  for (std::size_t epoch = state.epochs_done; epoch < last; ++epoch) {
    double const lr = cfg.lr_at(epoch);
    adam.lr = lr;
    double const prob_lr = cfg.prob_lr * lr / cfg.initial_lr;

    state.probability = project_probabilities(state.probability, cfg.constraint);
    auto [mask, regions] = generate_stable_mask(state.probability, cfg.constraint);
    SamplingMask const mask_u = inverse_center_shift(mask);

    for (auto const &batch : batch_order(train_set.size(), cfg.batch_size, mix_seed(cfg.seed, epoch + 1))) {
      std::vector<ItemGradients> grads(batch.size());
      parallel_for(batch.size(), cfg.threads, [&](std::size_t j) {
        grads[j] = item_gradients(train_set.items[batch[j]], mask_u, state.params, cfg.lambda1, cfg.lambda2);
      });
      double const scale = 1.0 / static_cast<double>(batch.size());
      std::vector<double> g_theta(state.params.parameter_count(), 0.0);
      Matrix g_p(rows, cols, 0.0);
      for (auto const &g : grads) {
        if (!std::isfinite(g.l_ift) || !std::isfinite(g.l_rec)) {
          throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
        }
        for (std::size_t i = 0; i < g_theta.size(); ++i) {
          g_theta[i] += scale * g.grad_params[i];
        }
        auto gp = g_p.values();
        auto src = g.grad_p.values();
        for (std::size_t i = 0; i < gp.size(); ++i) {
          gp[i] += scale * src[i];
        }
      }
      if (!g_p.all_finite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite gradient");
      }
      adam_step(state.params, g_theta, adam);
      prob_step(state.probability, state.prob_state, center_shift(g_p), cfg, prob_lr);
    }

    TrainLogRow row = evaluate_row(train_set, val_set, mask, state.params, cfg, epoch, lr);
    if (!std::isfinite(row.l_joint)) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
    }
    state.mask = std::move(mask);
    reports = std::move(regions);
    state.log.push_back(row);
    state.epochs_done = epoch + 1;
    if (ckpt_dir) {
      save_state(*ckpt_dir, state, cfg);
    }
    if (options.on_epoch) {
      options.on_epoch(row);
    }
  }

  if (options.out_dir) {
    auto const &dir = *options.out_dir;
    io::write_probability(dir / "probability.txt", state.probability);
    io::write_mask(dir / "mask.txt", state.mask);
    io::write_pgm(dir / "mask.pgm", state.mask);
    save_checkpoint(dir / "recnet.bin", state.params);
    write_train_log(dir / "train_log.csv", state.log);
    to_config(cfg).save(dir / "config.cfg");
    if (reports.empty()) {
      reports = generate_stable_mask(project_probabilities(state.probability, cfg.constraint), cfg.constraint).second;
    }
    write_region_reports(dir / "regions.csv", reports);
  }
  return state;
}

EvalReport evaluate(Dataset const &data, SamplingMask const &mask, RecNetParams const *params, std::size_t threads,
                    std::string method)
{
  auto const start = std::chrono::steady_clock::now();
  auto const [rows, cols] = data.dims();
  if (mask.rows() != rows || mask.cols() != cols) {
    throw ShapeError("mask dimensions do not match the dataset");
  }
  SamplingMask const mask_u = inverse_center_shift(mask);
  EvalReport report;
  report.method = std::move(method);
  report.psnr_u.resize(data.size());
  if (params) {
    report.psnr_rec.resize(data.size());
  }
  parallel_for(data.size(), threads, [&](std::size_t i) {
    auto const &item = data.items[i];
    RealImage xu(zero_filled(item.kspace, mask_u));
    report.psnr_u[i] = psnr(xu, item.image);
    if (params) {
      report.psnr_rec[i] = psnr(recnet_apply(xu, *params), item.image);
    }
  });
  report.mean_psnr_u = mean_psnr(report.psnr_u);
  if (params) {
    report.mean_psnr_rec = mean_psnr(report.psnr_rec);
  }
  report.realized_rate = rate_of(mask);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ComparisonCell const &ComparisonTable::at(double rate, std::string const &family) const
{
  auto const r = std::find(rates.begin(), rates.end(), rate);
  auto const f = std::find(families.begin(), families.end(), family);
  if (r == rates.end() || f == families.end()) {
    throw std::out_of_range("no comparison cell for " + family + " at rate " + io::format_double(rate));
  }
  return cells[static_cast<std::size_t>(r - rates.begin())][static_cast<std::size_t>(f - families.begin())];
}

BaselineSpec baseline_for(BaselineSpecs const &specs, BaselineFamily family, double rate)
{
  auto it = specs.find(family);
  BaselineSpec spec = it == specs.end() ? BaselineSpec{} : it->second;
  spec.family = family;
  spec.target_rate = rate;
  return spec;
}

ComparisonTable compare_methods(Dataset const &data, std::vector<double> const &rates,
                                std::vector<std::string> const &families,
                                std::map<ArtifactKey, MethodArtifact> const &artifacts, BaselineSpecs const &specs,
                                std::size_t threads)
{
  auto const [rows, cols] = data.dims();
  ComparisonTable table{rates, families, {}};
  for (double rate : rates) {
    auto &row = table.cells.emplace_back(families.size());
    for (std::size_t f = 0; f < families.size(); ++f) {
      std::optional<SamplingMask> mask;
      RecNetParams const *params = nullptr;
      if (auto it = artifacts.find({families[f], rate}); it != artifacts.end()) {
        mask = it->second.mask;
        params = it->second.params ? &*it->second.params : nullptr;
      } else {
        BaselineFamily family{};
        try {
          family = parse_family(families[f]);
        } catch (std::invalid_argument const &) {
          std::cerr << "warning: no " << families[f] << " mask at rate " << io::format_double(rate)
                    << ": not a baseline family and no artifact given\n";
          continue;
        }
        try {
          mask = make_baseline(baseline_for(specs, family, rate), rows, cols);
        } catch (std::invalid_argument const &e) {
          std::cerr << "warning: no " << families[f] << " mask at rate " << io::format_double(rate) << ": "
                    << e.what() << '\n';
          continue;
        }
      }
      try {
        EvalReport const rep = evaluate(data, *mask, params, threads, families[f]);
        row[f] = {rep.mean_psnr_u, rep.mean_psnr_rec, rep.realized_rate};
      } catch (ShapeError const &e) {
        std::cerr << "warning: skipping " << families[f] << " at rate " << io::format_double(rate) << ": " << e.what()
                  << '\n';
      }
    }
  }
  return table;
}

namespace {

std::string cell_text(std::optional<double> const &v)
{
  return v ? io::format_double(*v) : std::string{};
}

std::vector<std::string> split_csv(std::string const &line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

std::ofstream open_text(std::filesystem::path const &path)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  return out;
}

} // namespace

void write_comparison_csv(std::filesystem::path const &path, ComparisonTable const &table)
{
  auto out = open_text(path);
  out << "rate";
  for (auto const &f : table.families) {
    out << ',' << f << "_psnr_u," << f << "_psnr_rec";
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rates.size(); ++r) {
    out << io::format_double(table.rates[r]);
    for (auto const &cell : table.cells[r]) {
      out << ',' << cell_text(cell.psnr_u) << ',' << cell_text(cell.psnr_rec);
    }
    out << '\n';
  }
}

ComparisonTable read_comparison_csv(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty comparison table: " + path.string());
  }
  auto const header = split_csv(line);
  if (header.empty() || header[0] != "rate" || header.size() % 2 == 0) {
    throw DataError("malformed comparison header: " + path.string());
  }
  ComparisonTable table;
  std::string const suffix = "_psnr_u";
  for (std::size_t i = 1; i < header.size(); i += 2) {
    auto const &h = header[i];
    if (h.size() <= suffix.size() || h.substr(h.size() - suffix.size()) != suffix) {
      throw DataError("malformed comparison column: " + h);
    }
    table.families.push_back(h.substr(0, h.size() - suffix.size()));
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto const fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw DataError("comparison row has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    table.rates.push_back(io::parse_double(fields[0]));
    auto &row = table.cells.emplace_back();
    for (std::size_t i = 1; i < fields.size(); i += 2) {
      ComparisonCell cell;
      if (!fields[i].empty()) cell.psnr_u = io::parse_double(fields[i]);
      if (!fields[i + 1].empty()) cell.psnr_rec = io::parse_double(fields[i + 1]);
      row.push_back(cell);
    }
  }
  return table;
}

void write_train_log(std::filesystem::path const &path, std::vector<TrainLogRow> const &log)
{
  auto out = open_text(path);
  out << "epoch,lr,L_IFT,L_rec,L_joint,val_psnr_u,val_psnr_rec,realized_rate\n";
  for (auto const &r : log) {
    out << r.epoch << ',' << io::format_double(r.lr) << ',' << io::format_double(r.l_ift) << ','
        << io::format_double(r.l_rec) << ',' << io::format_double(r.l_joint) << ','
        << io::format_double(r.val_psnr_u) << ',' << io::format_double(r.val_psnr_rec) << ','
        << io::format_double(r.realized_rate) << '\n';
  }
}

std::vector<TrainLogRow> read_train_log(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  std::vector<TrainLogRow> log;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto const f = split_csv(line);
    if (f.size() != 8) {
      throw DataError("malformed training log row: " + line);
    }
    log.push_back({static_cast<std::size_t>(std::stoull(f[0])), io::parse_double(f[1]), io::parse_double(f[2]),
                   io::parse_double(f[3]), io::parse_double(f[4]), io::parse_double(f[5]), io::parse_double(f[6]),
                   io::parse_double(f[7])});
  }
  return log;
}

ProbabilityProfile probability_profile(ProbabilityMatrix const &p)
{
  std::size_t const rows = p.rows();
  std::size_t const cols = p.cols();
  auto const bins = static_cast<std::size_t>(
    std::ceil(std::hypot(static_cast<double>(rows), static_cast<double>(cols)) / 2.0));
  std::vector<double> sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  ProbabilityProfile out;
  out.row_marginal.assign(rows, 0.0);
  out.col_marginal.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double const v = p(r, c);
      double const d = std::hypot(static_cast<double>(r) - static_cast<double>(rows / 2),
                                  static_cast<double>(c) - static_cast<double>(cols / 2));
      std::size_t const b = std::min(bins - 1, static_cast<std::size_t>(d));
      sum[b] += v;
      count[b] += 1;
      out.row_marginal[r] += v / static_cast<double>(cols);
      out.col_marginal[c] += v / static_cast<double>(rows);
    }
  }
  out.radial.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.radial[b] = count[b] ? sum[b] / static_cast<double>(count[b]) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void write_probability_profile(std::filesystem::path const &path, ProbabilityProfile const &profile)
{
  auto out = open_text(path);
  out << "kind,index,value\n";
  auto emit = [&](char const *kind, std::vector<double> const &v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << kind << ',' << i << ',' << (std::isnan(v[i]) ? std::string{} : io::format_double(v[i])) << '\n';
    }
  };
  emit("radial", profile.radial);
  emit("row", profile.row_marginal);
  emit("col", profile.col_marginal);
}

} // namespace pupo
