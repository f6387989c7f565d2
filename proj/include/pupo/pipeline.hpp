#pragma once

#include "pupo/baselines.hpp"
#include "pupo/core.hpp"
#include "pupo/data.hpp"
#include "pupo/recnet.hpp"
#include "pupo/sampler.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pupo {

/// How the probability matrix turns its gradient into a step.
enum class ProbOptimizer
{
  /// Adam with one second-moment estimate shared by all entries: the step
  /// keeps the relative gradient sizes across k-space, so the mean-rate
  /// projection does not wash the update out.
  shared_rms,
  /// Plain per-entry Adam.
  adam,
};

std::string_view optimizer_name(ProbOptimizer opt) noexcept;
ProbOptimizer parse_optimizer(std::string_view name);

struct TrainConfig
{
  double lambda1 = 1.0; ///< weight of the undersampled-image loss
  double lambda2 = 1.0; ///< weight of the reconstruction loss
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  double initial_lr = 1e-3;
  double lr_decay_factor = std::sqrt(10.0);
  std::size_t decay_step = 20;
  double min_lr = 1e-8;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t recnet_depth = 5;
  std::size_t recnet_channels = 16;
  /// Target rate, epsilon, region size, probability bounds and mask seed.
  StableConstraintConfig constraint{.target_rate = 0.3};
  /// Base step of the probability matrix; decays with the same schedule as the network.
  double prob_lr = 0.03;
  ProbOptimizer prob_optimizer = ProbOptimizer::shared_rms;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  double target_rate() const noexcept { return constraint.target_rate; }
  /// max(min_lr, initial_lr * decay^-floor(epoch / decay_step)), epochs from 0.
  double lr_at(std::size_t epoch) const;
  /// Throws std::invalid_argument on non-positive sizes/rates or negative lambdas.
  void validate() const;
};

struct EvalReport
{
  std::string method;
  std::vector<double> psnr_u;   ///< per item, undersampled image vs ground truth
  std::vector<double> psnr_rec; ///< per item, empty without a network
  double mean_psnr_u = 0.0;
  std::optional<double> mean_psnr_rec;
  double realized_rate = 0.0;
  double runtime_seconds = 0.0;
};

struct TrainLogRow
{
  std::size_t epoch = 0;
  double lr = 0.0;
  double l_ift = 0.0;   ///< mean over training items, epoch-end parameters
  double l_rec = 0.0;
  double l_joint = 0.0;
  double val_psnr_u = 0.0;
  double val_psnr_rec = 0.0;
  double realized_rate = 0.0;

  friend bool operator==(TrainLogRow const &, TrainLogRow const &) = default;
};

/// Moments of the probability-matrix optimizer. `second` has one entry for
/// shared_rms and one per matrix entry for adam.
struct ProbOptimizerState
{
  std::vector<double> first;
  std::vector<double> second;
  std::uint64_t step = 0;

  friend bool operator==(ProbOptimizerState const &, ProbOptimizerState const &) = default;
};

struct TrainResult
{
  ProbabilityMatrix probability; ///< DC-centered, projected
  SamplingMask mask;             ///< DC-centered mask of the last epoch
  RecNetParams params;
  ProbOptimizerState prob_state;
  std::vector<TrainLogRow> log;
  TrainLogRow initial;           ///< validation metrics before the first update (epoch field unused)
  std::size_t epochs_done = 0;
};

struct TrainOptions
{
  /// Checkpoint bundle and final artifacts go here when set.
  std::optional<std::filesystem::path> out_dir{};
  /// Continue from out_dir/checkpoint when it exists.
  bool resume = false;
  /// Stop after this many total epochs (for interrupted-run tests).
  std::optional<std::size_t> stop_after{};
  std::function<void(TrainLogRow const &)> on_epoch{};
};

/// |inverse_2d(K o M)| for a DC-centered mask and unshifted k-space.
RealImage undersampled_image(ComplexGrid const &k, SamplingMask const &mask);

/// lambda1 * 1/2 ||x_u - y||^2 + lambda2 * 1/2 ||x_rec - y||^2
double joint_loss(RealImage const &x_u, RealImage const &x_rec, RealImage const &y, double lambda1, double lambda2);

struct JointGradients
{
  double l_ift = 0.0;
  double l_rec = 0.0;
  std::vector<double> grad_params;
  Matrix grad_probability; ///< DC-centered straight-through estimate
};

/// Forward and backward pass of the joint loss for one item.
JointGradients joint_gradients(DataItem const &item, SamplingMask const &mask, RecNetParams const &params,
                               double lambda1, double lambda2);

/// Joint training of the probability matrix and the network.
TrainResult train(Dataset const &train_set, Dataset const &val_set, TrainConfig const &cfg,
                  TrainOptions const &options = {});

/// Two-indicator evaluation; reconstruction PSNR only when params are given.
EvalReport evaluate(Dataset const &data, SamplingMask const &mask, RecNetParams const *params = nullptr,
                    std::size_t threads = 1, std::string method = {});

/// Mask (and optional network) for one (family, rate) cell of a comparison.
struct MethodArtifact
{
  SamplingMask mask;
  std::optional<RecNetParams> params;
};

struct ComparisonCell
{
  std::optional<double> psnr_u;
  std::optional<double> psnr_rec;
  std::optional<double> realized_rate;
};

struct ComparisonTable
{
  std::vector<double> rates;
  std::vector<std::string> families;
  std::vector<std::vector<ComparisonCell>> cells; ///< [rate][family]

  ComparisonCell const &at(double rate, std::string const &family) const;
};

using ArtifactKey = std::pair<std::string, double>;

/// Parameters per baseline family; families without an entry use BaselineSpec{}.
using BaselineSpecs = std::map<BaselineFamily, BaselineSpec>;

/// Spec for one (family, rate) cell: the family's entry with family and rate overridden.
BaselineSpec baseline_for(BaselineSpecs const &specs, BaselineFamily family, double rate);

/// Fills every (rate, family) cell. Baseline families without an artifact
/// are generated from `specs`; other families without an artifact stay blank.
ComparisonTable compare_methods(Dataset const &data, std::vector<double> const &rates,
                                std::vector<std::string> const &families,
                                std::map<ArtifactKey, MethodArtifact> const &artifacts, BaselineSpecs const &specs = {},
                                std::size_t threads = 1);

/// CSV: "rate,<family>_psnr_u,<family>_psnr_rec,..." with one row per rate;
/// blank cells for missing entries, "inf" for exact matches.
void write_comparison_csv(std::filesystem::path const &path, ComparisonTable const &table);
ComparisonTable read_comparison_csv(std::filesystem::path const &path);

/// "epoch,lr,L_IFT,L_rec,L_joint,val_psnr_u,val_psnr_rec,realized_rate"
void write_train_log(std::filesystem::path const &path, std::vector<TrainLogRow> const &log);
std::vector<TrainLogRow> read_train_log(std::filesystem::path const &path);

struct ProbabilityProfile
{
  std::vector<double> radial;       ///< mean by integer distance from DC; NaN for empty bins
  std::vector<double> row_marginal; ///< mean over columns, per row
  std::vector<double> col_marginal; ///< mean over rows, per column
};

/// Radial profile with ceil(diagonal / 2) bins plus both axis marginals.
ProbabilityProfile probability_profile(ProbabilityMatrix const &p);
/// CSV "kind,index,value" with kind in {radial,row,col}.
void write_probability_profile(std::filesystem::path const &path, ProbabilityProfile const &profile);

} // namespace pupo
