#pragma once

// Two-layer ReLU MLP with a softmax (M-way) or sigmoid (binary) head,
// trained with Adam and decoupled weight decay.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace divcov::router {

enum class HeadKind { kSoftmax, kSigmoid };

std::string_view to_token(HeadKind head);  // "softmax", "sigmoid"
HeadKind head_kind_from_token(std::string_view token);

struct MlpParams {
  int d_in = 0;
  int hidden = 0;
  int d_out = 0;
  HeadKind head = HeadKind::kSoftmax;
  // W1 (hidden x d_in, row-major), b1 (hidden), W2 (d_out x hidden), b2 (d_out).
  std::vector<double> theta;

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return static_cast<std::size_t>(hidden) * d_in; }
  std::size_t w2_offset() const { return b1_offset() + hidden; }
  std::size_t b2_offset() const { return w2_offset() + static_cast<std::size_t>(d_out) * hidden; }
  static std::size_t param_count(int d_in, int hidden, int d_out);

  void validate() const;
  bool operator==(const MlpParams&) const = default;
};

// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights and biases.
MlpParams init_mlp(int d_in, int hidden, int d_out, HeadKind head, std::uint64_t seed);

std::vector<double> mlp_logits(const MlpParams& params, std::span<const double> x);

// Softmax probabilities (sum to 1) or the single sigmoid output.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

struct Batch {
  std::vector<std::span<const double>> inputs;
  // Softmax: probability vector over d_out. Sigmoid: one target in [0, 1].
  std::vector<std::vector<double>> targets;
};

// Mean cross-entropy over the batch. When grad is given it receives the
// gradient with respect to theta (resized as needed).
double mlp_loss(const MlpParams& params, const Batch& batch, std::vector<double>* grad);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 200;
  int batch_size = 32;
  double weight_decay = 0.0;
  int hidden_dim = 64;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean of the epoch's batch losses, per example
  std::optional<double> val_loss;
};

struct TrainResult {
  MlpParams params;
  double initial_train_loss = 0.0;
  std::vector<EpochLog> log;
};

// Deterministic given config.seed: one stream initialises weights, a second
// shuffles each epoch. Throws NumericError naming epoch and batch when the
// loss is not finite.
TrainResult mlp_train(const Batch& train, const Batch* val, int d_out, HeadKind head,
                      const TrainConfig& config);

}  // namespace divcov::router
