// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "nfsense/sra.hpp"

namespace nfsense {

struct TcnConfig {
  std::size_t n_f = 32;
  std::size_t n_c = 64;
  std::size_t kernel_len = 5;
  std::size_t n_blocks = 4;
  std::vector<std::size_t> dilations{1, 2, 4, 8};
  std::size_t bottleneck_dim = 16;
  /// Kernel length of the stride-2 encoder and of the decoder conv.
  std::size_t bottleneck_kernel = 2;
  std::uint64_t seed = 0;

  void validate() const;
  /// Closed-form parameter count.
  std::size_t parameter_count() const;
  /// 1 + 2 (L - 1) sum(dilations): receptive field of the block stack.
  std::size_t stack_receptive_field() const;
};

/// (channels, time) row-major.
struct Tensor {
  std::size_t channels = 0;
  std::size_t time = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t c, std::size_t t) : channels(c), time(t), v(c * t, 0.0) {}
  double at(std::size_t c, std::size_t t) const { return v[c * time + t]; }
  double& at(std::size_t c, std::size_t t) { return v[c * time + t]; }
};

Tensor to_tensor(const Spectrogram& s);

/// Causal conv z[k][m] = b[k] + sum_i sum_c w[k][i][c] x[c][stride m - dilation i],
/// zero for negative indices; output length ceil(T / stride).
struct ConvLayer {
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::size_t stride = 1;
  std::vector<double> w;
  std::vector<double> b;

  ConvLayer() = default;
  ConvLayer(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t dilation, std::size_t stride = 1);
  std::size_t parameter_count() const { return w.size() + b.size(); }
};

/// conv1 -> ReLU -> conv2 -> ReLU, plus the input (through a 1x1 `proj` when
/// channel counts differ).
struct TcnBlock {
  ConvLayer conv1;
  ConvLayer conv2;
  std::optional<ConvLayer> proj;
};

/// Blocks -> ReLU(stride-2 encoder to bottleneck_dim) -> nearest x2 upsample
/// -> ReLU(decoder conv back to n_c) -> 1x1 output conv to n_f. Every layer
/// is causal, so output column n depends only on input columns <= n.
struct TcnModel {
  TcnConfig cfg;
  std::vector<TcnBlock> blocks;
  ConvLayer enc;
  ConvLayer dec;
  ConvLayer out;

  /// Layers in serialisation order: per block conv1, conv2, proj; then enc, dec, out.
  std::vector<ConvLayer*> layers();
  std::vector<const ConvLayer*> layers() const;
  std::size_t parameter_count() const;
  /// Same shapes, all zeros.
  TcnModel zeros_like() const;
};

/// Kaiming-uniform (a = sqrt 5) weights and biases, bound 1 / sqrt(fan_in),
/// rounded to float32.
TcnModel init_model(const TcnConfig& cfg);

Tensor dilated_conv_forward(const Tensor& x, const ConvLayer& layer);
Tensor tcn_block_forward(const Tensor& x, const TcnBlock& block);
Tensor forward(const TcnModel& model, const Tensor& x);

struct LossOptions {
  /// Restricts the loss to masked (no-data) input columns.
  bool masked_only = false;
};

struct LossAndGrad {
  double mse = 0.0;
  TcnModel grad;
};

/// Mean over the batch of ||F(X) - Y||^2 / (n_f T).
LossAndGrad loss_and_gradients(const TcnModel& model, std::span<const TrainingPair> batch, LossOptions opt = {});
double loss(const TcnModel& model, std::span<const TrainingPair> batch, LossOptions opt = {});

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  double grad_clip = 5.0;
  bool masked_only = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Adam with global-norm clipping; parameters are kept on the float32 grid.
/// Train MSE is the mean batch loss seen during the epoch, test MSE is
/// evaluated after it (0 for an empty test set). Throws std::runtime_error
/// naming the epoch if a loss becomes non-finite.
std::vector<EpochLoss> train(TcnModel& model, const Dataset& data, const TrainConfig& tcfg,
                             const EpochCallback& on_epoch = {});

void write_loss_csv(std::ostream& os, std::span<const EpochLoss> history);

/// Model output for masked columns (clamped to [0, 1]) merged with the
/// observed columns of x; the result carries no no-data flags.
Spectrogram recover(const TcnModel& model, const Spectrogram& x);

/// Column-wise linear interpolation across masked columns, nearest observed
/// column beyond the ends, zeros when nothing is observed.
Spectrogram interpolate_columns(const Spectrogram& x);

void save_model(const TcnModel& model, const std::filesystem::path& path);
TcnModel load_model(const std::filesystem::path& path);
/// Also rejects a file whose configuration differs from `expected`.
TcnModel load_model(const std::filesystem::path& path, const TcnConfig& expected);

/// Worker count for batch parallelism: NFSENSE_THREADS if set, else the
/// hardware concurrency (at least 1).
std::size_t worker_threads();

}  // namespace nfsense
