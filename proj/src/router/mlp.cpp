#include "divcov/router/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "divcov/core/error.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/simd/kernels.hpp"

namespace divcov::router {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

struct Activations {
  std::vector<double> pre;     // hidden pre-activation
  std::vector<double> hidden;  // after ReLU
  std::vector<double> logits;
};

void forward_into(const MlpParams& p, std::span<const double> x, Activations& act) {
  if (static_cast<int>(x.size()) != p.d_in) {
    throw ContractError("input dim " + std::to_string(x.size()) + " does not match d_in " +
                        std::to_string(p.d_in));
  }
  const double* w1 = p.theta.data() + p.w1_offset();
  const double* b1 = p.theta.data() + p.b1_offset();
  const double* w2 = p.theta.data() + p.w2_offset();
  const double* b2 = p.theta.data() + p.b2_offset();
  const auto& k = simd::kernels();
  act.pre.resize(p.hidden);
  act.hidden.resize(p.hidden);
  act.logits.resize(p.d_out);
  for (int j = 0; j < p.hidden; ++j) {
    act.pre[j] = k.dot(w1 + static_cast<std::size_t>(j) * p.d_in, x.data(), p.d_in) + b1[j];
    act.hidden[j] = act.pre[j] > 0.0 ? act.pre[j] : 0.0;
  }
  for (int o = 0; o < p.d_out; ++o) {
    act.logits[o] =
        k.dot(w2 + static_cast<std::size_t>(o) * p.hidden, act.hidden.data(), p.hidden) + b2[o];
  }
}

std::vector<double> softmax(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += out[i] = std::exp(z[i] - top);
  for (double& v : out) v /= sum;
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Loss of one example and d(loss)/d(logits).
double head_loss(const MlpParams& p, std::span<const double> logits,
                 std::span<const double> target, std::vector<double>& dlogits) {
  dlogits.resize(p.d_out);
  if (p.head == HeadKind::kSoftmax) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - top);
    const double log_sum = top + std::log(sum);
    double loss = 0.0;
    for (int o = 0; o < p.d_out; ++o) {
      if (target[o] != 0.0) loss -= target[o] * (logits[o] - log_sum);
      dlogits[o] = std::exp(logits[o] - log_sum) - target[o];
    }
    return loss;
  }
  const double z = logits[0];
  const double y = target[0];
  dlogits[0] = sigmoid(z) - y;
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void check_targets(const MlpParams& p, const Batch& batch) {
  if (batch.inputs.size() != batch.targets.size()) {
    throw ContractError("batch inputs and targets differ in length");
  }
  const std::size_t width = p.head == HeadKind::kSoftmax ? p.d_out : 1;
  for (const auto& t : batch.targets) {
    if (t.size() != width) throw ContractError("target width does not match the head");
  }
}

}  // namespace

std::string_view to_token(HeadKind head) {
  return head == HeadKind::kSoftmax ? "softmax" : "sigmoid";
}

HeadKind head_kind_from_token(std::string_view token) {
  if (token == "softmax") return HeadKind::kSoftmax;
  if (token == "sigmoid") return HeadKind::kSigmoid;
  throw ContractError("unknown head kind: " + std::string(token));
}

std::size_t MlpParams::param_count(int d_in, int hidden, int d_out) {
  return static_cast<std::size_t>(hidden) * d_in + hidden +
         static_cast<std::size_t>(d_out) * hidden + d_out;
}

void MlpParams::validate() const {
  if (d_in < 1 || hidden < 1 || d_out < 1) throw ContractError("MLP sizes must be >= 1");
  if (head == HeadKind::kSigmoid && d_out != 1) {
    throw ContractError("sigmoid head needs d_out = 1");
  }
  if (theta.size() != param_count(d_in, hidden, d_out)) {
    throw ContractError("MLP parameter count does not match its sizes");
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw NumericError("non-finite MLP parameter");
  }
}

MlpParams init_mlp(int d_in, int hidden, int d_out, HeadKind head, std::uint64_t seed) {
  MlpParams p;
  p.d_in = d_in;
  p.hidden = hidden;
  p.d_out = d_out;
  p.head = head;
  if (d_in < 1 || hidden < 1 || d_out < 1) throw ContractError("MLP sizes must be >= 1");
  if (head == HeadKind::kSigmoid && d_out != 1) {
    throw ContractError("sigmoid head needs d_out = 1");
  }
  p.theta.resize(MlpParams::param_count(d_in, hidden, d_out));
  Rng rng(seed);
  const double a1 = std::sqrt(1.0 / d_in);
  const double a2 = std::sqrt(1.0 / hidden);
  for (std::size_t i = 0; i < p.w2_offset(); ++i) p.theta[i] = uniform(rng, -a1, a1);
  for (std::size_t i = p.w2_offset(); i < p.theta.size(); ++i) {
    p.theta[i] = uniform(rng, -a2, a2);
  }
  return p;
}

std::vector<double> mlp_logits(const MlpParams& params, std::span<const double> x) {
  Activations act;
  forward_into(params, x, act);
  return act.logits;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  const auto logits = mlp_logits(params, x);
  if (params.head == HeadKind::kSoftmax) return softmax(logits);
  return {sigmoid(logits[0])};
}

double mlp_loss(const MlpParams& p, const Batch& batch, std::vector<double>* grad) {
  check_targets(p, batch);
  if (batch.inputs.empty()) throw ContractError("empty batch");
  const auto& k = simd::kernels();
  const double scale = 1.0 / static_cast<double>(batch.inputs.size());
  if (grad) grad->assign(p.theta.size(), 0.0);
  Activations act;
  std::vector<double> dlogits;
  std::vector<double> dhidden(p.hidden);
  double total = 0.0;
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    const auto x = batch.inputs[n];
    forward_into(p, x, act);
    total += head_loss(p, act.logits, batch.targets[n], dlogits);
    if (!grad) continue;
    double* g = grad->data();
    const double* w2 = p.theta.data() + p.w2_offset();
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (int o = 0; o < p.d_out; ++o) {
      const double d = dlogits[o] * scale;
      k.axpy(d, act.hidden.data(), g + p.w2_offset() + static_cast<std::size_t>(o) * p.hidden,
             p.hidden);
      g[p.b2_offset() + o] += d;
      k.axpy(d, w2 + static_cast<std::size_t>(o) * p.hidden, dhidden.data(), p.hidden);
    }
    for (int j = 0; j < p.hidden; ++j) {
      if (act.pre[j] <= 0.0) continue;
      k.axpy(dhidden[j], x.data(), g + p.w1_offset() + static_cast<std::size_t>(j) * p.d_in,
             p.d_in);
      g[p.b1_offset() + j] += dhidden[j];
    }
  }
  return total * scale;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ContractError("learning_rate must be >= 0");
  }
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (!(weight_decay >= 0.0)) throw ContractError("weight_decay must be >= 0");
  if (hidden_dim < 1) throw ContractError("hidden_dim must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ContractError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ContractError("epsilon must be > 0");
}

TrainResult mlp_train(const Batch& train, const Batch* val, int d_out, HeadKind head,
                      const TrainConfig& config) {
  config.validate();
  if (train.inputs.empty()) throw ContractError("empty training set");
  const int d_in = static_cast<int>(train.inputs.front().size());
  TrainResult result;
  result.params = init_mlp(d_in, config.hidden_dim, d_out, head, config.seed);
  MlpParams& p = result.params;
  check_targets(p, train);
  if (val) check_targets(p, *val);

  result.initial_train_loss = mlp_loss(p, train, nullptr);
  std::vector<double> m(p.theta.size(), 0.0);
  std::vector<double> v(p.theta.size(), 0.0);
  std::vector<double> grad;
  std::vector<std::size_t> order(train.inputs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(config.seed ^ kShuffleStream);
  const auto& k = simd::kernels();
  simd::AdamStep step;
  step.learning_rate = config.learning_rate;
  step.beta1 = config.beta1;
  step.beta2 = config.beta2;
  step.epsilon = config.epsilon;
  step.weight_decay = config.weight_decay;
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  Batch batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.inputs.clear();
      batch.targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.inputs.push_back(train.inputs[order[i]]);
        batch.targets.push_back(train.targets[order[i]]);
      }
      const double loss = mlp_loss(p, batch, &grad);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index));
      }
      epoch_loss += loss * static_cast<double>(end - start);
      beta1_t *= config.beta1;
      beta2_t *= config.beta2;
      step.bias_correction1 = 1.0 - beta1_t;
      step.bias_correction2 = 1.0 - beta2_t;
      k.adam_update(step, p.theta.data(), grad.data(), m.data(), v.data(), p.theta.size());
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(order.size());
    if (val && !val->inputs.empty()) entry.val_loss = mlp_loss(p, *val, nullptr);
    result.log.push_back(entry);
  }
  for (double x : p.theta) {
    if (!std::isfinite(x)) throw NumericError("training produced non-finite parameters");
  }
  return result;
}

}  // namespace divcov::router
