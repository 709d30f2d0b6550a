#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mpfmfd {

class Xoshiro256;

struct TcnConfig {
  int input_window_n = 32;
  int channels = 16;
  int kernel_size = 2;
  int num_blocks = 4;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double dropout_rate = 0.0;

  friend bool operator==(const TcnConfig&, const TcnConfig&) = default;
};

// Throws InvalidConfig on out-of-range fields.
void validate(const TcnConfig& config);

// 1 + 2 (kernel_size - 1) (2^num_blocks - 1)
int receptive_field(const TcnConfig& config) noexcept;

// Stack of residual blocks of dilated causal convolutions (dilation 1, 2, 4, ...)
// followed by a linear head on the last time step. Works in normalized units;
// it knows nothing about z-scoring, which TrainedModel owns.
//
// Flat parameter layout, block by block (C_in = 1 for block 0, else channels):
//   conv1.weight [channels][C_in][kernel]   conv1.bias [channels]
//   conv2.weight [channels][channels][kernel]  conv2.bias [channels]
//   skip.weight [channels][C_in]  skip.bias [channels]   (only when C_in != channels)
// then head.weight [channels], head.bias [1].
// Tap k of a kernel reads input position t - (kernel - 1 - k) * dilation;
// positions before the window start read zero.
class TcnArchitecture {
 public:
  explicit TcnArchitecture(const TcnConfig& config);

  const TcnConfig& config() const noexcept { return config_; }
  std::size_t parameter_count() const noexcept { return parameter_count_; }
  int window_length() const noexcept { return window_length_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  std::vector<double> initial_parameters(std::uint64_t seed) const;

  // Inference on one normalized window (dropout off).
  double forward(std::span<const double> params, std::span<const double> input) const;
  // Inference on many windows (row-major, count x window_length).
  void forward_batch(std::span<const double> params, std::span<const double> inputs,
                     std::span<double> outputs) const;

  // Mean squared error over a batch of windows (row-major, batch x window_length)
  // and its gradient with respect to params, written to `grad` (overwritten).
  // `dropout` may be null; when set and dropout_rate > 0, inverted dropout
  // masks are drawn from it.
  double batch_loss_and_gradient(std::span<const double> params, std::span<const double> inputs,
                                 std::span<const double> targets, std::span<double> grad,
                                 Xoshiro256* dropout = nullptr) const;

 private:
  struct BlockLayout {
    int in_channels = 0;
    int dilation = 1;
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
    std::size_t skip_w = 0, skip_b = 0;
    bool has_skip = false;
  };

  struct Workspace;

  double run_forward(std::span<const double> params, std::span<const double> input, Workspace& ws,
                     Xoshiro256* dropout) const;
  void run_backward(std::span<const double> params, double d_output, Workspace& ws,
                    std::span<double> grad) const;

  TcnConfig config_;
  int window_length_ = 0;
  std::vector<BlockLayout> blocks_;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
  std::size_t parameter_count_ = 0;
};

struct TrainingExamples {
  std::vector<double> inputs;   // count x window_length, normalized
  std::vector<double> targets;  // count, normalized
  std::size_t count = 0;
};

struct TrainingResult {
  std::vector<double> parameters;
  std::vector<double> loss_history;  // mean normalized MSE per epoch
};

// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) on mean squared error.
// Initialization, shuffling and dropout all derive from config.seed.
// Throws NonFiniteLoss if a batch loss diverges.
TrainingResult train_tcn(const TcnArchitecture& arch, const TrainingExamples& examples);

}  // namespace mpfmfd
