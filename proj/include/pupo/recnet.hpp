#pragma once

#include "pupo/core.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pupo {

struct AdamConfig;

/// Geometry of one convolution layer inside the flat parameter vector.
struct ConvLayer
{
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;        ///< 3 (same padding) or 1
  bool relu;
  std::size_t weight_offset; ///< weights laid out [out][in][ky][kx]
  std::size_t bias_offset;
};

/// Residual reconstruction CNN parameters plus Adam state.
///
/// Depth d means d convolution layers: d - 1 layers of 3x3 kernels with
/// `channels` feature maps and ReLU (the first reads the single input
/// channel), then a 1x1 fusion layer down to one channel. Depth 0 has no
/// CNN branch at all.
class RecNetParams
{
public:
  explicit RecNetParams(std::size_t depth, std::size_t channels = 16);

  /// Weights drawn uniformly in +-sqrt(6 / fan_in), biases zero.
  static RecNetParams he_uniform(std::size_t depth, std::size_t channels, std::uint64_t seed);

  std::size_t depth() const noexcept { return depth_; }
  std::size_t channels() const noexcept { return channels_; }
  std::vector<ConvLayer> const &layers() const noexcept { return layers_; }

  std::span<double> values() noexcept { return values_; }
  std::span<double const> values() const noexcept { return values_; }
  std::size_t parameter_count() const noexcept { return values_.size(); }

  std::span<double const> moment1() const noexcept { return m1_; }
  std::span<double const> moment2() const noexcept { return m2_; }
  std::uint64_t step() const noexcept { return step_; }

  /// Bumped on every parameter update; tapes recorded earlier become stale.
  std::uint64_t version() const noexcept { return version_; }

  friend bool operator==(RecNetParams const &a, RecNetParams const &b)
  {
    return a.depth_ == b.depth_ && a.channels_ == b.channels_ && a.values_ == b.values_ && a.m1_ == b.m1_ &&
           a.m2_ == b.m2_ && a.step_ == b.step_;
  }

private:
  friend void adam_step(RecNetParams &, std::span<double const>, AdamConfig const &);
  friend void save_checkpoint(std::filesystem::path const &, RecNetParams const &);
  friend RecNetParams load_checkpoint(std::filesystem::path const &);

  std::size_t depth_;
  std::size_t channels_;
  std::vector<ConvLayer> layers_;
  std::vector<double> values_;
  std::vector<double> m1_;
  std::vector<double> m2_;
  std::uint64_t step_ = 0;
  std::uint64_t version_ = 0;
};

/// Inputs of every layer, recorded by the forward pass for the backward pass.
struct ActivationTape
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t params_version = 0;
  std::vector<std::vector<double>> layer_inputs; ///< one [channels][rows][cols] block per layer
  bool valid = false;
};

struct ForwardResult
{
  RealImage x_rec;
  ActivationTape tape;
};

/// X_rec = X_u + f_cnn(X_u | theta). Spatial size is preserved at every depth.
ForwardResult recnet_forward(RealImage const &x_u, RecNetParams const &params);

/// Forward pass without recording a tape.
RealImage recnet_apply(RealImage const &x_u, RecNetParams const &params);

/// 1/2 ||x - y||_F^2
double euclidean_loss(RealImage const &x, RealImage const &y);
double euclidean_loss(Matrix const &x, Matrix const &y);

struct BackwardResult
{
  std::vector<double> param_grads; ///< same layout as RecNetParams::values()
  Matrix grad_x_u;
};

/// Gradients of a scalar loss given dL/dX_rec. Consumes the tape; a tape that
/// was already used, or recorded before the last parameter update, is
/// rejected with std::logic_error.
BackwardResult recnet_backward(ActivationTape &tape, RecNetParams const &params, Matrix const &grad_loss);

struct AdamConfig
{
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
};

/// Adam with decoupled weight decay: p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
/// Non-finite gradients are rejected with NumericalError before any state changes.
void adam_step(RecNetParams &params, std::span<double const> grads, AdamConfig const &cfg);

// Versioned binary checkpoint: "PUPONET1", uint32 version, uint32 depth,
// uint32 channels, uint64 step, uint64 count, then values, first and second
// moments as float64.
void save_checkpoint(std::filesystem::path const &path, RecNetParams const &params);
RecNetParams load_checkpoint(std::filesystem::path const &path);

} // namespace pupo
