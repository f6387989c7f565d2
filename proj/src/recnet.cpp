#include "pupo/recnet.hpp"

#include "pupo/io.hpp"
#include "pupo/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace pupo {

RecNetParams::RecNetParams(std::size_t depth, std::size_t channels)
  : depth_{depth}
  , channels_{channels}
{
  if (channels == 0) {
    throw std::invalid_argument("RecNetParams: channel count must be positive");
  }
  std::size_t offset = 0;
  std::size_t in = 1;
  for (std::size_t l = 0; l < depth; ++l) {
    bool const last = l + 1 == depth;
    ConvLayer layer{};
    layer.in_channels = in;
    layer.out_channels = last ? 1 : channels;
    layer.kernel = last ? 1 : 3;
    layer.relu = !last;
    layer.weight_offset = offset;
    offset += layer.out_channels * layer.in_channels * layer.kernel * layer.kernel;
    layer.bias_offset = offset;
    offset += layer.out_channels;
    layers_.push_back(layer);
    in = layer.out_channels;
  }
  values_.assign(offset, 0.0);
  m1_.assign(offset, 0.0);
  m2_.assign(offset, 0.0);
}

RecNetParams RecNetParams::he_uniform(std::size_t depth, std::size_t channels, std::uint64_t seed)
{
  RecNetParams params(depth, channels);
  Rng rng(seed);
  for (auto const &layer : params.layers_) {
    double const fan_in = static_cast<double>(layer.in_channels * layer.kernel * layer.kernel);
    double const bound = std::sqrt(6.0 / fan_in);
    std::size_t const count = layer.bias_offset - layer.weight_offset;
    for (std::size_t i = 0; i < count; ++i) {
      params.values_[layer.weight_offset + i] = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  return params;
}

namespace {

// out[o] = b[o] + sum_i w[o][i] * in[i], zero padding of kernel/2.
void conv_forward(std::vector<double> const &in, std::size_t rows, std::size_t cols, ConvLayer const &layer,
                  double const *params, std::vector<double> &out)
{
  std::size_t const plane = rows * cols;
  std::size_t const k = layer.kernel;
  auto const pad = static_cast<std::ptrdiff_t>(k / 2);
  auto const h = static_cast<std::ptrdiff_t>(rows);
  auto const w = static_cast<std::ptrdiff_t>(cols);
  out.assign(layer.out_channels * plane, 0.0);
  double const *weights = params + layer.weight_offset;
  double const *bias = params + layer.bias_offset;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    double *dst = out.data() + o * plane;
    std::fill(dst, dst + plane, bias[o]);
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      double const *src = in.data() + i * plane;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          double const wv = weights[((o * layer.in_channels + i) * k + ky) * k + kx];
          auto const dy = static_cast<std::ptrdiff_t>(ky) - pad;
          auto const dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::ptrdiff_t const y0 = std::max<std::ptrdiff_t>(0, -dy);
          std::ptrdiff_t const y1 = std::min(h, h - dy);
          std::ptrdiff_t const x0 = std::max<std::ptrdiff_t>(0, -dx);
          std::ptrdiff_t const x1 = std::min(w, w - dx);
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            double *orow = dst + y * w;
            double const *irow = src + (y + dy) * w + dx;
            for (std::ptrdiff_t x = x0; x < x1; ++x) {
              orow[x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
  if (layer.relu) {
    for (double &v : out) {
      v = v > 0.0 ? v : 0.0;
    }
  }
}

// Given dL/d(out) (already gated by the ReLU derivative), accumulate
// dL/dw, dL/db and write dL/d(in).
void conv_backward(std::vector<double> const &in, std::size_t rows, std::size_t cols, ConvLayer const &layer,
                   double const *params, std::vector<double> const &grad_out, double *grad_params,
                   std::vector<double> &grad_in)
{
  std::size_t const plane = rows * cols;
  std::size_t const k = layer.kernel;
  auto const pad = static_cast<std::ptrdiff_t>(k / 2);
  auto const h = static_cast<std::ptrdiff_t>(rows);
  auto const w = static_cast<std::ptrdiff_t>(cols);
  grad_in.assign(layer.in_channels * plane, 0.0);
  double const *weights = params + layer.weight_offset;
  double *gw = grad_params + layer.weight_offset;
  double *gb = grad_params + layer.bias_offset;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    double const *g = grad_out.data() + o * plane;
    double bsum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      bsum += g[p];
    }
    gb[o] += bsum;
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      double const *src = in.data() + i * plane;
      double *gsrc = grad_in.data() + i * plane;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          std::size_t const widx = ((o * layer.in_channels + i) * k + ky) * k + kx;
          double const wv = weights[widx];
          auto const dy = static_cast<std::ptrdiff_t>(ky) - pad;
          auto const dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::ptrdiff_t const y0 = std::max<std::ptrdiff_t>(0, -dy);
          std::ptrdiff_t const y1 = std::min(h, h - dy);
          std::ptrdiff_t const x0 = std::max<std::ptrdiff_t>(0, -dx);
          std::ptrdiff_t const x1 = std::min(w, w - dx);
          double acc = 0.0;
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            double const *grow = g + y * w;
            double const *irow = src + (y + dy) * w + dx;
            double *girow = gsrc + (y + dy) * w + dx;
            for (std::ptrdiff_t x = x0; x < x1; ++x) {
              acc += grow[x] * irow[x];
              girow[x] += wv * grow[x];
            }
          }
          gw[widx] += acc;
        }
      }
    }
  }
}

void require_input(RealImage const &x_u)
{
  if (x_u.rows() == 0 || x_u.cols() == 0) {
    throw ShapeError("recnet: empty input");
  }
}

RealImage add_residual(RealImage const &x_u, std::vector<double> const &residual)
{
  Matrix out = x_u.pixels();
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += residual[i];
  }
  return RealImage(std::move(out));
}

} // namespace

ForwardResult recnet_forward(RealImage const &x_u, RecNetParams const &params)
{
  require_input(x_u);
  ActivationTape tape;
  tape.rows = x_u.rows();
  tape.cols = x_u.cols();
  tape.params_version = params.version();
  tape.valid = true;
  if (params.depth() == 0) {
    return {x_u, std::move(tape)};
  }
  auto const src = x_u.pixels().values();
  std::vector<double> act(src.begin(), src.end());
  std::vector<double> next;
  for (auto const &layer : params.layers()) {
    conv_forward(act, tape.rows, tape.cols, layer, params.values().data(), next);
    tape.layer_inputs.push_back(std::move(act));
    act = std::move(next);
    next = {};
  }
  return {add_residual(x_u, act), std::move(tape)};
}

RealImage recnet_apply(RealImage const &x_u, RecNetParams const &params)
{
  require_input(x_u);
  if (params.depth() == 0) {
    return x_u;
  }
  auto const src = x_u.pixels().values();
  std::vector<double> act(src.begin(), src.end());
  std::vector<double> next;
  for (auto const &layer : params.layers()) {
    conv_forward(act, x_u.rows(), x_u.cols(), layer, params.values().data(), next);
    std::swap(act, next);
  }
  return add_residual(x_u, act);
}

double euclidean_loss(Matrix const &x, Matrix const &y)
{
  require_same_shape(x, y, "euclidean_loss");
  auto const a = x.values();
  auto const b = y.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const d = a[i] - b[i];
    s += d * d;
  }
  return 0.5 * s;
}

double euclidean_loss(RealImage const &x, RealImage const &y)
{
  return euclidean_loss(x.pixels(), y.pixels());
}

BackwardResult recnet_backward(ActivationTape &tape, RecNetParams const &params, Matrix const &grad_loss)
{
  if (!tape.valid) {
    throw std::logic_error("recnet_backward: tape already consumed");
  }
  if (tape.params_version != params.version() || tape.layer_inputs.size() != params.depth()) {
    throw std::logic_error("recnet_backward: stale tape");
  }
  if (grad_loss.rows() != tape.rows || grad_loss.cols() != tape.cols) {
    throw ShapeError("recnet_backward: gradient shape does not match the forward input");
  }

  BackwardResult result{std::vector<double>(params.parameter_count(), 0.0), grad_loss};
  auto const gl = grad_loss.values();
  std::vector<double> grad(gl.begin(), gl.end());
  std::vector<double> grad_in;
  auto const &layers = params.layers();
  for (std::size_t l = layers.size(); l-- > 0;) {
    auto const &layer = layers[l];
    conv_backward(tape.layer_inputs[l], tape.rows, tape.cols, layer, params.values().data(), grad,
                  result.param_grads.data(), grad_in);
    if (l > 0) {
      // Input of layer l is ReLU(pre-activation of layer l-1): gate by its sign.
      auto const &act = tape.layer_inputs[l];
      for (std::size_t i = 0; i < grad_in.size(); ++i) {
        if (!(act[i] > 0.0)) {
          grad_in[i] = 0.0;
        }
      }
    }
    std::swap(grad, grad_in);
  }
  if (!layers.empty()) {
    // Global skip: identity path plus the CNN branch.
    auto gx = result.grad_x_u.values();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += grad[i];
    }
  }
  tape.layer_inputs.clear();
  tape.valid = false;
  return result;
}

void adam_step(RecNetParams &params, std::span<double const> grads, AdamConfig const &cfg)
{
  if (grads.size() != params.values_.size()) {
    throw ShapeError("adam_step: gradient size does not match parameter count");
  }
  if (!std::all_of(grads.begin(), grads.end(), [](double g) { return std::isfinite(g); })) {
    throw NumericalError("adam_step: non-finite gradient");
  }
  params.step_ += 1;
  params.version_ += 1;
  double const t = static_cast<double>(params.step_);
  double const c1 = 1.0 - std::pow(cfg.beta1, t);
  double const c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    double &m = params.m1_[i];
    double &v = params.m2_[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[i] * grads[i];
    double const m_hat = m / c1;
    double const v_hat = v / c2;
    double &p = params.values_[i];
    p -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p);
  }
}

namespace {

constexpr std::array<char, 8> kNetTag{'P', 'U', 'P', 'O', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

} // namespace

void save_checkpoint(std::filesystem::path const &path, RecNetParams const &params)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot open for writing: " + path.string());
  }
  out.write(kNetTag.data(), kNetTag.size());
  io::put_u32(out, kCheckpointVersion);
  io::put_u32(out, static_cast<std::uint32_t>(params.depth_));
  io::put_u32(out, static_cast<std::uint32_t>(params.channels_));
  io::put_u64(out, params.step_);
  io::put_u64(out, params.values_.size());
  io::put_f64s(out, params.values_);
  io::put_f64s(out, params.m1_);
  io::put_f64s(out, params.m2_);
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

RecNetParams load_checkpoint(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open: " + path.string());
  }
  std::array<char, 8> tag{};
  in.read(tag.data(), tag.size());
  if (!in || tag != kNetTag) {
    throw DataError("not a RecNet checkpoint: " + path.string());
  }
  auto const version = io::get_u32(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  auto const depth = io::get_u32(in);
  auto const channels = io::get_u32(in);
  auto const step = io::get_u64(in);
  auto const count = io::get_u64(in);
  if (!in || channels == 0) {
    throw DataError("corrupt checkpoint header: " + path.string());
  }
  RecNetParams params(depth, channels);
  if (count != params.values_.size()) {
    throw DataError("checkpoint parameter count does not match its architecture");
  }
  params.values_ = io::get_f64s(in, count);
  params.m1_ = io::get_f64s(in, count);
  params.m2_ = io::get_f64s(in, count);
  params.step_ = step;
  return params;
}

} // namespace pupo
