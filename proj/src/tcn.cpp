#include "mpfmfd/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpfmfd/error.hpp"
#include "mpfmfd/rng.hpp"

namespace mpfmfd {
namespace {

// out[o][t] = bias[o] + sum_{i,k} w[o][i][k] * in[i][t - (K-1-k) d]
void causal_conv(const double* in, int cin, const double* w, const double* bias, int cout, int kernel,
                 int dilation, int length, double* out) {
  for (int o = 0; o < cout; ++o) std::fill(out + o * length, out + (o + 1) * length, bias[o]);
  for (int o = 0; o < cout; ++o) {
    double* dst = out + o * length;
    for (int i = 0; i < cin; ++i) {
      const double* src = in + i * length;
      for (int k = 0; k < kernel; ++k) {
        const int shift = (kernel - 1 - k) * dilation;
        const double wv = w[(o * cin + i) * kernel + k];
        for (int t = shift; t < length; ++t) dst[t] += wv * src[t - shift];
      }
    }
  }
}

// Accumulates parameter gradients and, when d_in is non-null, the input gradient.
void causal_conv_backward(const double* in, int cin, const double* w, int cout, int kernel, int dilation,
                          int length, const double* d_out, double* d_in, double* d_w, double* d_bias) {
  for (int o = 0; o < cout; ++o) {
    const double* g = d_out + o * length;
    double sum = 0.0;
    for (int t = 0; t < length; ++t) sum += g[t];
    d_bias[o] += sum;
    for (int i = 0; i < cin; ++i) {
      const double* src = in + i * length;
      for (int k = 0; k < kernel; ++k) {
        const int shift = (kernel - 1 - k) * dilation;
        double acc = 0.0;
        for (int t = shift; t < length; ++t) acc += g[t] * src[t - shift];
        d_w[(o * cin + i) * kernel + k] += acc;
        if (d_in != nullptr) {
          const double wv = w[(o * cin + i) * kernel + k];
          double* dst = d_in + i * length;
          for (int t = shift; t < length; ++t) dst[t - shift] += wv * g[t];
        }
      }
    }
  }
}

}  // namespace

void validate(const TcnConfig& config) {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, "tcn: " + what); };
  if (config.input_window_n < 1) bad("input_window_n must be >= 1");
  if (config.channels < 1) bad("channels must be >= 1");
  if (config.kernel_size < 2) bad("kernel_size must be >= 2");
  if (config.num_blocks < 1 || config.num_blocks > 24) bad("num_blocks must lie in [1, 24]");
  if (!(config.learning_rate > 0.0)) bad("learning_rate must be > 0");
  if (config.epochs < 1) bad("epochs must be >= 1");
  if (config.batch_size < 1) bad("batch_size must be >= 1");
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) bad("dropout_rate must lie in [0, 1)");
}

int receptive_field(const TcnConfig& config) noexcept {
  return 1 + 2 * (config.kernel_size - 1) * ((1 << config.num_blocks) - 1);
}

struct TcnArchitecture::Workspace {
  std::vector<std::vector<double>> block_in;  // num_blocks + 1, last is the stack output
  std::vector<std::vector<double>> act1, act2;    // tanh outputs
  std::vector<std::vector<double>> mask1, mask2;  // empty when dropout is off
  std::vector<double> d_out, d_in, d_hidden, d_pre;
};

TcnArchitecture::TcnArchitecture(const TcnConfig& config) : config_(config) {
  validate(config_);
  window_length_ = config_.input_window_n + 1;
  const auto ch = static_cast<std::size_t>(config_.channels);
  const auto k = static_cast<std::size_t>(config_.kernel_size);
  std::size_t offset = 0;
  int dilation = 1;
  for (int b = 0; b < config_.num_blocks; ++b) {
    BlockLayout block;
    block.in_channels = b == 0 ? 1 : config_.channels;
    block.dilation = dilation;
    const auto cin = static_cast<std::size_t>(block.in_channels);
    block.w1 = offset;
    offset += ch * cin * k;
    block.b1 = offset;
    offset += ch;
    block.w2 = offset;
    offset += ch * ch * k;
    block.b2 = offset;
    offset += ch;
    block.has_skip = block.in_channels != config_.channels;
    if (block.has_skip) {
      block.skip_w = offset;
      offset += ch * cin;
      block.skip_b = offset;
      offset += ch;
    }
    blocks_.push_back(block);
    dilation *= 2;
  }
  head_w_ = offset;
  offset += ch;
  head_b_ = offset;
  offset += 1;
  parameter_count_ = offset;
}

std::vector<double> TcnArchitecture::initial_parameters(std::uint64_t seed) const {
  std::vector<double> params(parameter_count_);
  Xoshiro256 rng(seed, 0);
  auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) params[begin + i] = bound * (2.0 * rng.uniform() - 1.0);
  };
  const auto ch = static_cast<std::size_t>(config_.channels);
  const auto k = static_cast<std::size_t>(config_.kernel_size);
  for (const BlockLayout& block : blocks_) {
    const auto cin = static_cast<std::size_t>(block.in_channels);
    fill(block.w1, ch * cin * k, cin * k);
    fill(block.b1, ch, cin * k);
    fill(block.w2, ch * ch * k, ch * k);
    fill(block.b2, ch, ch * k);
    if (block.has_skip) {
      fill(block.skip_w, ch * cin, cin);
      fill(block.skip_b, ch, cin);
    }
  }
  fill(head_w_, ch, ch);
  fill(head_b_, 1, ch);
  return params;
}

double TcnArchitecture::run_forward(std::span<const double> params, std::span<const double> input,
                                    Workspace& ws, Xoshiro256* dropout) const {
  const int length = window_length_;
  const int ch = config_.channels;
  const int kernel = config_.kernel_size;
  const std::size_t plane = static_cast<std::size_t>(ch) * length;
  const bool use_dropout = dropout != nullptr && config_.dropout_rate > 0.0;
  const double keep_scale = use_dropout ? 1.0 / (1.0 - config_.dropout_rate) : 1.0;

  const std::size_t nb = blocks_.size();
  ws.block_in.resize(nb + 1);
  ws.act1.resize(nb);
  ws.act2.resize(nb);
  ws.mask1.resize(nb);
  ws.mask2.resize(nb);
  ws.block_in[0].assign(input.begin(), input.end());

  auto apply_dropout = [&](std::vector<double>& act, std::vector<double>& mask) {
    if (!use_dropout) {
      mask.clear();
      return;
    }
    mask.resize(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) {
      mask[i] = dropout->uniform() < config_.dropout_rate ? 0.0 : keep_scale;
    }
  };

  std::vector<double> hidden(plane);
  for (std::size_t b = 0; b < nb; ++b) {
    const BlockLayout& block = blocks_[b];
    const std::vector<double>& in = ws.block_in[b];
    std::vector<double>& act1 = ws.act1[b];
    std::vector<double>& act2 = ws.act2[b];
    act1.resize(plane);
    act2.resize(plane);

    causal_conv(in.data(), block.in_channels, &params[block.w1], &params[block.b1], ch, kernel, block.dilation,
                length, act1.data());
    for (double& v : act1) v = std::tanh(v);
    apply_dropout(act1, ws.mask1[b]);
    const double* conv2_in = act1.data();
    if (!ws.mask1[b].empty()) {
      for (std::size_t i = 0; i < plane; ++i) hidden[i] = act1[i] * ws.mask1[b][i];
      conv2_in = hidden.data();
    }

    causal_conv(conv2_in, ch, &params[block.w2], &params[block.b2], ch, kernel, block.dilation, length,
                act2.data());
    for (double& v : act2) v = std::tanh(v);
    apply_dropout(act2, ws.mask2[b]);

    std::vector<double>& out = ws.block_in[b + 1];
    out.resize(plane);
    if (block.has_skip) {
      causal_conv(in.data(), block.in_channels, &params[block.skip_w], &params[block.skip_b], ch, 1, 1, length,
                  out.data());
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
    if (ws.mask2[b].empty()) {
      for (std::size_t i = 0; i < plane; ++i) out[i] += act2[i];
    } else {
      for (std::size_t i = 0; i < plane; ++i) out[i] += act2[i] * ws.mask2[b][i];
    }
  }

  const std::vector<double>& top = ws.block_in[nb];
  double y = params[head_b_];
  for (int o = 0; o < ch; ++o) y += params[head_w_ + o] * top[static_cast<std::size_t>(o) * length + length - 1];
  return y;
}

void TcnArchitecture::run_backward(std::span<const double> params, double d_output, Workspace& ws,
                                   std::span<double> grad) const {
  const int length = window_length_;
  const int ch = config_.channels;
  const int kernel = config_.kernel_size;
  const std::size_t plane = static_cast<std::size_t>(ch) * length;
  const std::size_t nb = blocks_.size();

  const std::vector<double>& top = ws.block_in[nb];
  ws.d_out.assign(plane, 0.0);
  for (int o = 0; o < ch; ++o) {
    const std::size_t last = static_cast<std::size_t>(o) * length + length - 1;
    grad[head_w_ + o] += d_output * top[last];
    ws.d_out[last] = params[head_w_ + o] * d_output;
  }
  grad[head_b_] += d_output;

  ws.d_pre.resize(plane);
  ws.d_hidden.resize(plane);
  std::vector<double> hidden(plane);
  for (std::size_t bi = nb; bi-- > 0;) {
    const BlockLayout& block = blocks_[bi];
    const std::vector<double>& in = ws.block_in[bi];
    const std::size_t in_plane = static_cast<std::size_t>(block.in_channels) * length;
    const bool need_input_grad = bi > 0;
    ws.d_in.assign(in_plane, 0.0);

    if (block.has_skip) {
      causal_conv_backward(in.data(), block.in_channels, &params[block.skip_w], ch, 1, 1, length, ws.d_out.data(),
                           need_input_grad ? ws.d_in.data() : nullptr, &grad[block.skip_w], &grad[block.skip_b]);
    } else {
      for (std::size_t i = 0; i < plane; ++i) ws.d_in[i] += ws.d_out[i];
    }

    const std::vector<double>& act1 = ws.act1[bi];
    const std::vector<double>& act2 = ws.act2[bi];
    const std::vector<double>& mask1 = ws.mask1[bi];
    const std::vector<double>& mask2 = ws.mask2[bi];
    for (std::size_t i = 0; i < plane; ++i) {
      const double m = mask2.empty() ? 1.0 : mask2[i];
      ws.d_pre[i] = ws.d_out[i] * m * (1.0 - act2[i] * act2[i]);
    }

    const double* conv2_in = act1.data();
    if (!mask1.empty()) {
      for (std::size_t i = 0; i < plane; ++i) hidden[i] = act1[i] * mask1[i];
      conv2_in = hidden.data();
    }
    std::fill(ws.d_hidden.begin(), ws.d_hidden.end(), 0.0);
    causal_conv_backward(conv2_in, ch, &params[block.w2], ch, kernel, block.dilation, length, ws.d_pre.data(),
                         ws.d_hidden.data(), &grad[block.w2], &grad[block.b2]);

    for (std::size_t i = 0; i < plane; ++i) {
      const double m = mask1.empty() ? 1.0 : mask1[i];
      ws.d_pre[i] = ws.d_hidden[i] * m * (1.0 - act1[i] * act1[i]);
    }
    causal_conv_backward(in.data(), block.in_channels, &params[block.w1], ch, kernel, block.dilation, length,
                         ws.d_pre.data(), need_input_grad ? ws.d_in.data() : nullptr, &grad[block.w1],
                         &grad[block.b1]);

    std::swap(ws.d_out, ws.d_in);
  }
}

double TcnArchitecture::forward(std::span<const double> params, std::span<const double> input) const {
  if (params.size() != parameter_count_) fail(ErrorCode::CorruptFile, "parameter count does not match architecture");
  if (input.size() != static_cast<std::size_t>(window_length_)) {
    fail(ErrorCode::WrongWindowLength, "expected window of " + std::to_string(window_length_) + " values");
  }
  Workspace ws;
  return run_forward(params, input, ws, nullptr);
}

void TcnArchitecture::forward_batch(std::span<const double> params, std::span<const double> inputs,
                                    std::span<double> outputs) const {
  const auto length = static_cast<std::size_t>(window_length_);
  if (params.size() != parameter_count_) fail(ErrorCode::CorruptFile, "parameter count does not match architecture");
  if (inputs.size() != outputs.size() * length) fail(ErrorCode::WrongWindowLength, "batch shape mismatch");
  Workspace ws;
  for (std::size_t s = 0; s < outputs.size(); ++s) {
    outputs[s] = run_forward(params, inputs.subspan(s * length, length), ws, nullptr);
  }
}

double TcnArchitecture::batch_loss_and_gradient(std::span<const double> params, std::span<const double> inputs,
                                                std::span<const double> targets, std::span<double> grad,
                                                Xoshiro256* dropout) const {
  const std::size_t batch = targets.size();
  const auto length = static_cast<std::size_t>(window_length_);
  if (batch == 0 || inputs.size() != batch * length || grad.size() != parameter_count_ ||
      params.size() != parameter_count_) {
    fail(ErrorCode::WrongWindowLength, "batch shape mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  Workspace ws;
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(batch);
  for (std::size_t s = 0; s < batch; ++s) {
    const double y = run_forward(params, inputs.subspan(s * length, length), ws, dropout);
    const double err = y - targets[s];
    loss += err * err;
    run_backward(params, 2.0 * err * scale, ws, grad);
  }
  return loss * scale;
}

TrainingResult train_tcn(const TcnArchitecture& arch, const TrainingExamples& examples) {
  const TcnConfig& config = arch.config();
  const auto length = static_cast<std::size_t>(arch.window_length());
  if (examples.count == 0) fail(ErrorCode::SeriesTooShort, "no training examples");

  TrainingResult result;
  result.parameters = arch.initial_parameters(config.seed);
  std::vector<double>& params = result.parameters;
  const std::size_t np = params.size();

  Xoshiro256 shuffle_rng(config.seed, 1);
  Xoshiro256 dropout_rng(config.seed, 2);

  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<std::size_t> order(examples.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_inputs;
  std::vector<double> batch_targets;

  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - start);
      batch_inputs.resize(count * length);
      batch_targets.resize(count);
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t idx = order[start + j];
        std::copy_n(examples.inputs.begin() + static_cast<std::ptrdiff_t>(idx * length), length,
                    batch_inputs.begin() + static_cast<std::ptrdiff_t>(j * length));
        batch_targets[j] = examples.targets[idx];
      }
      const double loss = arch.batch_loss_and_gradient(params, batch_inputs, batch_targets, grad, &dropout_rng);
      if (!std::isfinite(loss)) {
        fail(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1) +
                                           "; try a smaller learning_rate");
      }
      epoch_loss += loss * static_cast<double>(count);

      beta1_pow *= beta1;
      beta2_pow *= beta2;
      const double step = config.learning_rate;
      for (std::size_t p = 0; p < np; ++p) {
        m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
        v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
        const double m_hat = m[p] / (1.0 - beta1_pow);
        const double v_hat = v[p] / (1.0 - beta2_pow);
        params[p] -= step * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace mpfmfd
