#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsamp/rng.hpp"
#include "rsamp/tensor.hpp"

namespace rsamp::nn {

using Label = std::int32_t;

// One affine layer: out = in * weights + bias, weights shaped (in, out).
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t input_dim() const noexcept { return weights.rows(); }
  std::size_t output_dim() const noexcept { return weights.cols(); }

  bool operator==(const DenseLayer&) const = default;
};

// Multi-layer perceptron parameters. Hidden layers use ReLU followed by
// inverted dropout; the last layer emits raw logits.
struct ModelParams {
  std::vector<DenseLayer> layers;

  // Gaussian weights with the given standard deviation, zero biases.
  // sizes = {input, hidden..., classes}; at least two entries.
  static ModelParams init(std::span<const std::size_t> sizes, double init_std, Rng& rng);
  static ModelParams zeros(std::span<const std::size_t> sizes);

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_dim() const;
  std::size_t num_classes() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  // Throws DimensionError unless consecutive layers chain.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

// Gradients share the parameter layout.
using Gradients = ModelParams;

enum class Mode { train, eval };

// Output of a forward pass. In train mode the activations needed by
// backward() are retained; in eval mode only the logits are kept.
struct ForwardPass {
  Matrix logits;
  double dropout_keep = 1.0;
  // layer_inputs[k] is the input seen by layer k (post-dropout for k > 0).
  std::vector<Matrix> layer_inputs;
  // Hidden pre-activations, one per hidden layer.
  std::vector<Matrix> pre_activations;
  // Dropout scale factors (0 or 1/keep) per hidden layer; empty when keep == 1.
  std::vector<Matrix> dropout_masks;

  bool has_cache() const noexcept { return !layer_inputs.empty(); }
};

// Zeroes each entry with probability 1-keep and scales survivors by 1/keep,
// in row-major order. Returns the applied scale factors.
Matrix apply_inverted_dropout(Matrix& activations, double keep, Rng& rng);

ForwardPass forward(const ModelParams& params, const Matrix& batch, double dropout_keep, Rng& rng,
                    Mode mode);

// -log softmax(logits_i)[label_i] per row, via max-subtracted log-sum-exp.
std::vector<double> loss_per_sample(const Matrix& logits, std::span<const Label> labels);

// Sum in index order divided by the count.
double mean_loss(std::span<const double> losses);

// Gradient of the mean batch cross-entropy w.r.t. every parameter.
Gradients backward(const ModelParams& params, const ForwardPass& pass,
                   std::span<const Label> labels);

// params -= lr * grads. Throws NumericalError naming the layer on a
// non-finite gradient; params are untouched in that case.
void sgd_step(ModelParams& params, const Gradients& grads, double lr);

double gradient_norm(const Gradients& grads);

struct TrainStepReport {
  std::vector<double> losses;
  double mean_loss = 0.0;
  double gradient_norm = 0.0;
};

// forward (train) -> loss_per_sample -> backward -> sgd_step. Losses are
// evaluated before the update.
TrainStepReport train_step(ModelParams& params, const Matrix& batch, std::span<const Label> labels,
                           double dropout_keep, double lr, Rng& rng);

// Fraction of rows whose argmax logit (lowest index on ties) matches the label.
// Runs in eval mode, chunked to bound memory.
double evaluate_accuracy(const ModelParams& params, const Matrix& inputs,
                         std::span<const Label> labels);

std::vector<Label> predict(const ModelParams& params, const Matrix& inputs);

}  // namespace rsamp::nn
