#include "pupo/cli.hpp"

#include "pupo/baselines.hpp"
#include "pupo/config.hpp"
#include "pupo/data.hpp"
#include "pupo/fourier.hpp"
#include "pupo/io.hpp"
#include "pupo/metrics.hpp"
#include "pupo/pipeline.hpp"
#include "pupo/sampler.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace pupo {

namespace fs = std::filesystem;

std::set<std::string> const &run_config_keys()
{
  static std::set<std::string> const keys = [] {
    std::set<std::string> k = train_config_keys();
    k.insert({"data.manifest", "data.size", "data.train_count", "data.val_count", "data.test_count",
              "data.phantom_seed", "data.augment", "data.rotations", "data.augment_seed", "output.dir",
              "compare.rates", "compare.families", "compare.probabilistic"});
    for (std::string section : {"baseline", "baseline.gaussian", "baseline.poisson", "baseline.line1d",
                                "baseline.center_block", "baseline.uniform_grid"}) {
      for (char const *key : {"sigma", "min_distance", "center_fraction", "seed"}) {
        k.insert(section + "." + key);
      }
    }
    return k;
  }();
  return keys;
}

namespace {

struct RunData
{
  std::optional<Dataset> train;
  std::optional<Dataset> val;
  std::optional<Dataset> test;
};

RunData load_data(ConfigFile const &cfg)
{
  RunData data;
  auto const size = cfg.get_size("data", "size");
  if (auto manifest = cfg.get("data", "manifest")) {
    auto sets = load_manifest(*manifest, size);
    if (sets.contains(Split::train)) data.train = std::move(sets[Split::train]);
    if (sets.contains(Split::val)) data.val = std::move(sets[Split::val]);
    if (sets.contains(Split::test)) data.test = std::move(sets[Split::test]);
  } else {
    std::size_t const n = size.value_or(64);
    std::uint64_t const seed = cfg.get_size("data", "phantom_seed").value_or(1);
    data.train = make_phantom_set(cfg.get_size("data", "train_count").value_or(32), n, seed, Split::train);
    data.val = make_phantom_set(cfg.get_size("data", "val_count").value_or(8), n, seed + 1, Split::val);
    data.test = make_phantom_set(cfg.get_size("data", "test_count").value_or(32), n, seed + 2, Split::test);
  }
  if (data.train && cfg.get_bool("data", "augment").value_or(false)) {
    AugmentSpec spec;
    spec.rotations_per_image = cfg.get_size("data", "rotations").value_or(8);
    spec.rotation_seed = cfg.get_size("data", "augment_seed").value_or(0);
    data.train = augment(*data.train, spec);
  }
  return data;
}

Dataset const &require_split(std::optional<Dataset> const &set, char const *name)
{
  if (!set || set->empty()) {
    throw DataError(std::string("no ") + name + " data available");
  }
  return *set;
}

// [baseline] applies to every family; [baseline.<family>] overrides it.
BaselineSpecs baselines_from(ConfigFile const &cfg)
{
  BaselineSpecs specs;
  for (auto family : {BaselineFamily::gaussian, BaselineFamily::poisson, BaselineFamily::line1d,
                      BaselineFamily::center_block, BaselineFamily::uniform_grid}) {
    BaselineSpec spec;
    spec.family = family;
    std::string const own = "baseline." + std::string(family_name(family));
    for (std::string const &section : {std::string("baseline"), own}) {
      if (auto v = cfg.get_double(section, "sigma")) spec.sigma = *v;
      if (auto v = cfg.get_double(section, "min_distance")) spec.min_distance = *v;
      if (auto v = cfg.get_double(section, "center_fraction")) spec.center_fraction = *v;
      if (auto v = cfg.get_size(section, "seed")) spec.seed = *v;
    }
    specs.emplace(family, spec);
  }
  return specs;
}

ConfigFile load_run_config(std::string const &path)
{
  ConfigFile cfg = path.empty() ? ConfigFile{} : ConfigFile::load(path);
  cfg.require_known(run_config_keys());
  return cfg;
}

std::string rate_tag(double rate)
{
  return std::to_string(static_cast<int>(std::lround(rate * 1000.0)));
}

void print_report(EvalReport const &rep)
{
  std::cout << "realized_rate " << io::format_double(rep.realized_rate) << '\n';
  std::cout << "psnr_u " << io::format_double(rep.mean_psnr_u) << '\n';
  if (rep.mean_psnr_rec) {
    std::cout << "psnr_rec " << io::format_double(*rep.mean_psnr_rec) << '\n';
  }
}

struct Overrides
{
  std::string config;
  std::optional<double> rate;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> threads;
  std::string out;

  void add_to(CLI::App *cmd)
  {
    cmd->add_option("--config", config, "Run configuration file");
    cmd->add_option("--rate", rate, "Target sampling rate in (0, 1]");
    cmd->add_option("--size", size, "Image side length");
    cmd->add_option("--seed", seed, "Global seed");
    cmd->add_option("--depth", depth, "RecNet depth");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--threads", threads, "Worker threads");
    cmd->add_option("--out", out, "Output directory");
  }

  void apply(ConfigFile &cfg) const
  {
    if (rate) cfg.set("constraint", "rate", io::format_double(*rate));
    if (size) cfg.set("data", "size", std::to_string(*size));
    if (seed) cfg.set("train", "seed", std::to_string(*seed));
    if (depth) cfg.set("train", "depth", std::to_string(*depth));
    if (epochs) cfg.set("train", "epochs", std::to_string(*epochs));
    if (threads) cfg.set("train", "threads", std::to_string(*threads));
    if (!out.empty()) cfg.set("output", "dir", out);
  }
};

fs::path output_dir(ConfigFile const &cfg, char const *fallback)
{
  fs::path dir = cfg.get("output", "dir").value_or(fallback);
  fs::create_directories(dir);
  return dir;
}

int cmd_mask(std::string const &family, double rate, std::size_t size, std::uint64_t seed, std::string const &out,
             std::string const &prob_file, std::optional<double> sigma, std::optional<double> min_distance,
             std::optional<double> center_fraction, std::size_t region_size)
{
  fs::path const dir = out.empty() ? fs::path("mask_out") : fs::path(out);
  SamplingMask mask;
  if (family == "probabilistic") {
    StableConstraintConfig cc;
    cc.target_rate = rate;
    cc.region_size = region_size;
    cc.seed = seed;
    ProbabilityMatrix p = prob_file.empty() ? ProbabilityMatrix::uniform(size, size, std::min(1.0, rate))
                                            : io::read_probability(prob_file);
    cc.validate(p.rows(), p.cols());
    auto [m, reports] = generate_stable_mask(project_probabilities(p, cc), cc);
    mask = std::move(m);
    fs::create_directories(dir);
    write_region_reports(dir / "regions.csv", reports);
  } else {
    BaselineSpec spec;
    spec.family = parse_family(family);
    spec.target_rate = rate;
    spec.seed = seed;
    spec.sigma = sigma;
    spec.min_distance = min_distance;
    spec.center_fraction = center_fraction;
    mask = make_baseline(spec, size, size);
  }
  fs::create_directories(dir);
  io::write_mask(dir / "mask.txt", mask);
  io::write_pgm(dir / "mask.pgm", mask);
  std::cout << "realized_rate " << io::format_double(rate_of(mask)) << '\n';
  return kExitOk;
}

int cmd_undersample(std::string const &input, std::string const &mask_file, std::string const &truth_file,
                    std::string const &out)
{
  std::optional<ComplexGrid> k;
  RealImage truth;
  if (io::is_complex_file(input)) {
    k = io::read_complex(input);
    truth = RealImage(magnitude(inverse_2d(*k)));
  } else {
    truth = load_image(input);
    k = to_kspace(truth);
  }
  if (!truth_file.empty()) {
    truth = load_image(truth_file);
  }
  SamplingMask const mask = io::read_mask(mask_file);
  RealImage const xu = undersampled_image(*k, mask);
  fs::path const dir = out.empty() ? fs::path("undersample_out") : fs::path(out);
  io::write_image(dir / "x_u.img", xu);
  io::write_pgm(dir / "x_u.pgm", xu.pixels());
  std::cout << "psnr_u " << io::format_double(psnr(xu, truth)) << '\n';
  return kExitOk;
}

int cmd_train(Overrides const &ov, bool resume)
{
  ConfigFile cfg = load_run_config(ov.config);
  ov.apply(cfg);
  fs::path const dir = output_dir(cfg, "train_out");
  cfg.save(dir / "run.cfg");
  TrainConfig const tc = train_config_from(cfg);
  RunData const data = load_data(cfg);
  TrainOptions opts;
  opts.out_dir = dir;
  opts.resume = resume;
  opts.on_epoch = [](TrainLogRow const &row) {
    std::cout << "epoch " << row.epoch << " L_joint " << io::format_double(row.l_joint) << " val_psnr_u "
              << io::format_double(row.val_psnr_u) << " val_psnr_rec " << io::format_double(row.val_psnr_rec)
              << '\n';
  };
  TrainResult const res = train(require_split(data.train, "train"), require_split(data.val, "val"), tc, opts);
  if (data.test && !data.test->empty()) {
    EvalReport const rep = evaluate(*data.test, res.mask, &res.params, tc.threads, "probabilistic");
    std::cout << "test ";
    print_report(rep);
  }
  return kExitOk;
}

int cmd_eval(Overrides const &ov, std::string const &mask_file, std::string const &checkpoint,
             std::string const &split)
{
  ConfigFile cfg = load_run_config(ov.config);
  ov.apply(cfg);
  RunData const data = load_data(cfg);
  Split const which = parse_split(split);
  auto const &set = require_split(which == Split::train ? data.train : which == Split::val ? data.val : data.test,
                                  split.c_str());
  SamplingMask const mask = io::read_mask(mask_file);
  std::optional<RecNetParams> params;
  if (!checkpoint.empty()) {
    params = load_checkpoint(checkpoint);
  }
  EvalReport const rep =
    evaluate(set, mask, params ? &*params : nullptr, cfg.get_size("train", "threads").value_or(1));
  print_report(rep);
  if (cfg.get("output", "dir")) {
    fs::path const dir = output_dir(cfg, "eval_out");
    std::ofstream csv(dir / "eval.csv");
    csv << "item,psnr_u,psnr_rec\n";
    for (std::size_t i = 0; i < rep.psnr_u.size(); ++i) {
      csv << i << ',' << io::format_double(rep.psnr_u[i]) << ','
          << (params ? io::format_double(rep.psnr_rec[i]) : std::string{}) << '\n';
    }
    cfg.save(dir / "run.cfg");
  }
  return kExitOk;
}

int cmd_compare(Overrides const &ov)
{
  ConfigFile cfg = load_run_config(ov.config);
  ov.apply(cfg);
  fs::path const dir = output_dir(cfg, "compare_out");
  cfg.save(dir / "run.cfg");
  RunData const data = load_data(cfg);
  Dataset const &test = require_split(data.test, "test");
  auto const rates = parse_double_list(cfg.get("compare", "rates").value_or("0.2,0.3"));
  auto const families = parse_string_list(
    cfg.get("compare", "families").value_or("line1d,center_block,uniform_grid,gaussian,poisson,probabilistic"));
  auto const prob_dirs = parse_string_list(cfg.get("compare", "probabilistic").value_or(""));
  std::map<ArtifactKey, MethodArtifact> artifacts;
  for (std::size_t i = 0; i < prob_dirs.size() && i < rates.size(); ++i) {
    fs::path const art = prob_dirs[i];
    try {
      MethodArtifact a{io::read_mask(art / "mask.txt"), std::nullopt};
      if (fs::exists(art / "recnet.bin")) {
        a.params = load_checkpoint(art / "recnet.bin");
      }
      artifacts.emplace(ArtifactKey{"probabilistic", rates[i]}, std::move(a));
    } catch (DataError const &e) {
      std::cerr << "warning: " << e.what() << '\n';
    }
  }
  std::size_t const threads = cfg.get_size("train", "threads").value_or(1);
  BaselineSpecs const specs = baselines_from(cfg);
  ComparisonTable const table = compare_methods(test, rates, families, artifacts, specs, threads);
  write_comparison_csv(dir / "comparison.csv", table);

  // One example per method and rate, next to the original.
  auto const &item = test.items.front();
  auto const [rows, cols] = test.dims();
  io::write_pgm(dir / "previews" / "original.pgm", item.image.pixels());
  for (double rate : rates) {
    for (auto const &family : families) {
      std::optional<MethodArtifact> art;
      if (auto it = artifacts.find({family, rate}); it != artifacts.end()) {
        art = it->second;
      } else if (family != "probabilistic") {
        try {
          art = MethodArtifact{make_baseline(baseline_for(specs, parse_family(family), rate), rows, cols),
                               std::nullopt};
        } catch (std::invalid_argument const &) {
        }
      }
      if (!art) {
        continue;
      }
      std::string const stem = family + "_" + rate_tag(rate);
      RealImage const xu = undersampled_image(item.kspace, art->mask);
      io::write_pgm(dir / "previews" / (stem + "_mask.pgm"), art->mask);
      io::write_pgm(dir / "previews" / (stem + "_u.pgm"), xu.pixels());
      if (art->params) {
        io::write_pgm(dir / "previews" / (stem + "_rec.pgm"), recnet_apply(xu, *art->params).pixels());
      }
    }
  }
  std::ifstream csv(dir / "comparison.csv");
  std::cout << csv.rdbuf();
  return kExitOk;
}

int cmd_profile(std::string const &prob_file, std::string const &out)
{
  ProbabilityMatrix const p = io::read_probability(prob_file);
  fs::path const path = out.empty() ? fs::path("profile.csv") : fs::path(out);
  write_probability_profile(path, probability_profile(p));
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_phantoms(std::string const &out, std::size_t size, std::uint64_t seed, std::size_t n_train, std::size_t n_val,
                 std::size_t n_test)
{
  fs::path const dir = out.empty() ? fs::path("phantoms") : fs::path(out);
  fs::create_directories(dir);
  fs::path const manifest = dir / "manifest.txt";
  std::ofstream(manifest, std::ios::trunc) << "# split path\n";
  std::uint64_t s = seed;
  for (auto [split, count] : {std::pair{Split::train, n_train}, {Split::val, n_val}, {Split::test, n_test}}) {
    if (count > 0) {
      write_dataset(dir / std::string(split_name(split)), manifest, make_phantom_set(count, size, s, split));
    }
    ++s;
  }
  std::cout << "wrote " << manifest.string() << '\n';
  return kExitOk;
}

} // namespace

int run_cli(int argc, char const *const *argv)
{
  CLI::App app{"Probabilistic k-space undersampling: masks, joint training, evaluation"};
  app.require_subcommand(1);

  std::string family = "probabilistic";
  double rate = 0.2;
  std::size_t size = 64;
  std::uint64_t seed = 0;
  std::string out;
  std::string prob_file;
  std::optional<double> sigma;
  std::optional<double> min_distance;
  std::optional<double> center_fraction;
  std::size_t region_size = 10;
  auto *mask = app.add_subcommand("mask", "Generate a sampling mask");
  mask->add_option("--family", family, "probabilistic|gaussian|poisson|line1d|center_block|uniform_grid");
  mask->add_option("--rate", rate, "Target sampling rate in (0, 1]");
  mask->add_option("--size", size, "Mask side length");
  mask->add_option("--seed", seed, "Seed");
  mask->add_option("--out", out, "Output directory");
  mask->add_option("--prob", prob_file, "Probability matrix file (probabilistic family)");
  mask->add_option("--sigma", sigma, "Gaussian width in pixels");
  mask->add_option("--min-distance", min_distance, "Poisson minimum distance");
  mask->add_option("--center-fraction", center_fraction, "Budget share of the fully sampled center");
  mask->add_option("--region-size", region_size, "Region side for the stable constraints");

  std::string input;
  std::string mask_file;
  std::string truth;
  auto *under = app.add_subcommand("undersample", "Zero-filled image from k-space or an image and a mask");
  under->add_option("--input", input, "k-space grid or image file")->required();
  under->add_option("--mask", mask_file, "Mask file")->required();
  under->add_option("--truth", truth, "Ground-truth image (default: the input itself)");
  under->add_option("--out", out, "Output directory");

  Overrides train_ov;
  bool resume = false;
  auto *trn = app.add_subcommand("train", "Jointly train the probability matrix and the network");
  train_ov.add_to(trn);
  trn->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");

  Overrides cmp_ov;
  auto *cmp = app.add_subcommand("compare", "PSNR table over mask families and rates");
  cmp_ov.add_to(cmp);

  Overrides eval_ov;
  std::string checkpoint;
  std::string split = "test";
  auto *ev = app.add_subcommand("eval", "Undersampling and reconstruction PSNR of a mask");
  eval_ov.add_to(ev);
  ev->add_option("--mask", mask_file, "Mask file")->required();
  ev->add_option("--checkpoint", checkpoint, "RecNet checkpoint");
  ev->add_option("--split", split, "train|val|test");

  auto *prof = app.add_subcommand("profile", "Radial and axis profiles of a probability matrix");
  prof->add_option("--prob", prob_file, "Probability matrix file")->required();
  prof->add_option("--out", out, "Output CSV");

  std::size_t n_train = 32;
  std::size_t n_val = 8;
  std::size_t n_test = 32;
  std::uint64_t phantom_seed = 1;
  auto *ph = app.add_subcommand("phantoms", "Write a synthetic phantom dataset and manifest");
  ph->add_option("--out", out, "Output directory");
  ph->add_option("--size", size, "Image side length");
  ph->add_option("--seed", phantom_seed, "Seed of the training split (val and test use the next two)");
  ph->add_option("--train", n_train, "Training items");
  ph->add_option("--val", n_val, "Validation items");
  ph->add_option("--test", n_test, "Test items");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mask) {
      return cmd_mask(family, rate, size, seed, out, prob_file, sigma, min_distance, center_fraction, region_size);
    }
    if (*under) {
      return cmd_undersample(input, mask_file, truth, out);
    }
    if (*trn) {
      return cmd_train(train_ov, resume);
    }
    if (*cmp) {
      return cmd_compare(cmp_ov);
    }
    if (*ev) {
      return cmd_eval(eval_ov, mask_file, checkpoint, split);
    }
    if (*prof) {
      return cmd_profile(prob_file, out);
    }
    if (*ph) {
      return cmd_phantoms(out, size, phantom_seed, n_train, n_val, n_test);
    }
  } catch (ShapeError const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (DataError const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (fs::filesystem_error const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (NumericalError const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(std::vector<std::string> const &args)
{
  std::vector<char const *> argv;
  argv.reserve(args.size());
  for (auto const &a : args) {
    argv.push_back(a.c_str());
  }
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace pupo
