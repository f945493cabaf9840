#include "rsamp/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsamp/errors.hpp"

namespace rsamp::nn {

namespace {

std::string layer_shape(const DenseLayer& layer) {
  return layer.weights.shape_string() + "+(" + std::to_string(layer.bias.size()) + ")";
}

void check_labels(std::span<const Label> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) {
    throw DimensionError("label count " + std::to_string(labels.size()) + " does not match " +
                         std::to_string(rows) + " rows");
  }
  for (const Label y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(classes) + ")");
    }
  }
}

void check_keep(double keep) {
  if (!(keep > 0.0 && keep <= 1.0)) {
    throw ArgumentError("dropout_keep must lie in (0, 1], got " + std::to_string(keep));
  }
}

}  // namespace

ModelParams ModelParams::zeros(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) {
    throw ArgumentError("a model needs at least an input and an output size");
  }
  ModelParams p;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (sizes[k] == 0 || sizes[k + 1] == 0) {
      throw ArgumentError("layer sizes must be positive");
    }
    p.layers.push_back({Matrix(sizes[k], sizes[k + 1]), std::vector<double>(sizes[k + 1], 0.0)});
  }
  return p;
}

ModelParams ModelParams::init(std::span<const std::size_t> sizes, double init_std, Rng& rng) {
  if (!(init_std >= 0.0) || !std::isfinite(init_std)) {
    throw ArgumentError("init_std must be finite and non-negative");
  }
  ModelParams p = zeros(sizes);
  for (auto& layer : p.layers) {
    for (double& w : layer.weights.data()) {
      w = init_std * rng.normal();
    }
  }
  return p;
}

std::vector<std::size_t> ModelParams::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) {
    return sizes;
  }
  sizes.push_back(layers.front().input_dim());
  for (const auto& layer : layers) {
    sizes.push_back(layer.output_dim());
  }
  return sizes;
}

std::size_t ModelParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().input_dim();
}

std::size_t ModelParams::num_classes() const {
  return layers.empty() ? 0 : layers.back().output_dim();
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += layer.weights.size() + layer.bias.size();
  }
  return n;
}

bool ModelParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
    return rsamp::all_finite(l.weights.data()) && rsamp::all_finite(l.bias);
  });
}

void ModelParams::validate() const {
  if (layers.empty()) {
    throw DimensionError("model has no layers");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].bias.size() != layers[k].output_dim()) {
      throw DimensionError("layer " + std::to_string(k) + " bias does not match " +
                           layer_shape(layers[k]));
    }
    if (k + 1 < layers.size() && layers[k].output_dim() != layers[k + 1].input_dim()) {
      throw DimensionError("layer " + std::to_string(k) + " " + layer_shape(layers[k]) +
                           " does not chain into layer " + std::to_string(k + 1) + " " +
                           layer_shape(layers[k + 1]));
    }
  }
}

Matrix apply_inverted_dropout(Matrix& activations, double keep, Rng& rng) {
  check_keep(keep);
  Matrix mask(activations.rows(), activations.cols());
  const double scale = 1.0 / keep;
  auto a = activations.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    m[i] = rng.bernoulli(keep) ? scale : 0.0;
    a[i] *= m[i];
  }
  return mask;
}

ForwardPass forward(const ModelParams& params, const Matrix& batch, double dropout_keep, Rng& rng,
                    Mode mode) {
  check_keep(dropout_keep);
  params.validate();
  if (batch.cols() != params.input_dim()) {
    throw DimensionError("forward: batch " + batch.shape_string() + " does not fit input dim " +
                         std::to_string(params.input_dim()));
  }
  ForwardPass pass;
  pass.dropout_keep = dropout_keep;
  const bool train = mode == Mode::train;
  const bool use_dropout = train && dropout_keep < 1.0;

  Matrix current = batch;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& layer = params.layers[k];
    Matrix z = matmul(current, layer.weights);
    add_row_vector(z, layer.bias);
    if (train) {
      pass.layer_inputs.push_back(std::move(current));
    }
    if (k + 1 == params.layers.size()) {
      pass.logits = std::move(z);
      break;
    }
    Matrix a = z;
    for (double& v : a.data()) {
      v = v > 0.0 ? v : 0.0;
    }
    if (use_dropout) {
      pass.dropout_masks.push_back(apply_inverted_dropout(a, dropout_keep, rng));
    }
    if (train) {
      pass.pre_activations.push_back(std::move(z));
    }
    current = std::move(a);
  }
  return pass;
}

std::vector<double> loss_per_sample(const Matrix& logits, std::span<const Label> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  std::vector<double> losses(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = logits.row(r);
    const auto top = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    const double m = z[top];
    double rest = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
      if (c != top) {
        rest += std::exp(z[c] - m);
      }
    }
    // log-sum-exp(z) - z_y = (m - z_y) + log(1 + rest)
    losses[r] = (m - z[static_cast<std::size_t>(labels[r])]) + std::log1p(rest);
  }
  return losses;
}

double mean_loss(std::span<const double> losses) {
  if (losses.empty()) {
    throw ArgumentError("mean_loss: empty loss vector");
  }
  double sum = 0.0;
  for (const double l : losses) {
    sum += l;
  }
  return sum / static_cast<double>(losses.size());
}

Gradients backward(const ModelParams& params, const ForwardPass& pass,
                   std::span<const Label> labels) {
  if (!pass.has_cache()) {
    throw StateError("backward: forward pass was not run in train mode (no cached activations)");
  }
  if (pass.layer_inputs.size() != params.layers.size()) {
    throw StateError("backward: cached activations do not match the model depth");
  }
  const Matrix& logits = pass.logits;
  check_labels(labels, logits.rows(), logits.cols());
  const auto batch = static_cast<double>(logits.rows());

  // d(mean CE)/d(logits) = (softmax - onehot) / B
  Matrix delta(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = logits.row(r);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    auto d = delta.row(r);
    for (std::size_t c = 0; c < z.size(); ++c) {
      d[c] = std::exp(z[c] - m);
      sum += d[c];
    }
    for (std::size_t c = 0; c < z.size(); ++c) {
      d[c] /= sum;
    }
    d[static_cast<std::size_t>(labels[r])] -= 1.0;
    for (double& v : d) {
      v /= batch;
    }
  }

  Gradients grads;
  grads.layers.resize(params.layers.size());
  const bool masked = !pass.dropout_masks.empty();
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    grads.layers[k].weights = matmul_at_b(pass.layer_inputs[k], delta);
    grads.layers[k].bias = column_sums(delta);
    if (k == 0) {
      break;
    }
    Matrix upstream = matmul_a_bt(delta, params.layers[k].weights);
    auto u = upstream.data();
    const auto pre = pass.pre_activations[k - 1].data();
    if (masked) {
      const auto mask = pass.dropout_masks[k - 1].data();
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= mask[i];
      }
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(pre[i] > 0.0)) {
        u[i] = 0.0;
      }
    }
    delta = std::move(upstream);
  }
  return grads;
}

void sgd_step(ModelParams& params, const Gradients& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ArgumentError("learning rate must be finite and non-negative");
  }
  if (grads.layers.size() != params.layers.size()) {
    throw DimensionError("sgd_step: gradient depth does not match the model");
  }
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& p = params.layers[k];
    const auto& g = grads.layers[k];
    if (p.weights.rows() != g.weights.rows() || p.weights.cols() != g.weights.cols() ||
        p.bias.size() != g.bias.size()) {
      throw DimensionError("sgd_step: layer " + std::to_string(k) + " gradient " +
                           layer_shape(g) + " vs parameters " + layer_shape(p));
    }
    if (!rsamp::all_finite(g.weights.data()) || !rsamp::all_finite(g.bias)) {
      throw NumericalError("sgd_step: non-finite gradient in layer " + std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto w = params.layers[k].weights.data();
    const auto gw = grads.layers[k].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= lr * gw[i];
    }
    auto& b = params.layers[k].bias;
    const auto& gb = grads.layers[k].bias;
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i] -= lr * gb[i];
    }
  }
}

double gradient_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& layer : grads.layers) {
    for (const double g : layer.weights.data()) {
      sq += g * g;
    }
    for (const double g : layer.bias) {
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

TrainStepReport train_step(ModelParams& params, const Matrix& batch, std::span<const Label> labels,
                           double dropout_keep, double lr, Rng& rng) {
  const ForwardPass pass = forward(params, batch, dropout_keep, rng, Mode::train);
  TrainStepReport report;
  report.losses = loss_per_sample(pass.logits, labels);
  report.mean_loss = mean_loss(report.losses);
  const Gradients grads = backward(params, pass, labels);
  report.gradient_norm = gradient_norm(grads);
  sgd_step(params, grads, lr);
  return report;
}

std::vector<Label> predict(const ModelParams& params, const Matrix& inputs) {
  constexpr std::size_t chunk = 512;
  Rng unused(0);
  std::vector<Label> out;
  out.reserve(inputs.rows());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < inputs.rows(); start += chunk) {
    const std::size_t stop = std::min(inputs.rows(), start + chunk);
    rows.clear();
    for (std::size_t r = start; r < stop; ++r) {
      rows.push_back(r);
    }
    const Matrix part = gather_rows(inputs, rows);
    const ForwardPass pass = forward(params, part, 1.0, unused, Mode::eval);
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) {
      const auto z = pass.logits.row(r);
      // max_element returns the first maximum: ties go to the lowest class.
      out.push_back(static_cast<Label>(std::max_element(z.begin(), z.end()) - z.begin()));
    }
  }
  return out;
}

double evaluate_accuracy(const ModelParams& params, const Matrix& inputs,
                         std::span<const Label> labels) {
  if (inputs.rows() == 0) {
    throw ArgumentError("evaluate_accuracy: empty input");
  }
  check_labels(labels, inputs.rows(), params.num_classes());
  const auto predicted = predict(params, inputs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    correct += predicted[i] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

}  // namespace rsamp::nn
