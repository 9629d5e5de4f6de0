// Copyright 2026 The ldlage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDLAGE_MODEL_HPP_
#define LDLAGE_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldlage/grid.hpp"
#include "ldlage/loss.hpp"

namespace ldlage {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[size_t(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[size_t(r) * cols_ + c]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { kRectifier, kIdentity };

/// One fully-connected layer: out = act(weight * in + bias).
struct Layer {
  Matrix weight;             // out_dim x in_dim
  std::vector<double> bias;  // out_dim
  Activation activation = Activation::kIdentity;

  int in_dim() const { return weight.cols(); }
  int out_dim() const { return weight.rows(); }
};

/// The trainable head: a chain of fully-connected layers mapping an
/// embedding to K logits. Hidden layers use the rectifier, the final layer
/// is linear; the softmax is applied by the loss and inference code, never
/// stored here.
struct ModelHead {
  std::vector<Layer> layers;

  int input_dim() const { return layers.front().in_dim(); }
  int output_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

/// Per-layer pre-activations and activations captured by forward() for the
/// exact backward pass.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre_activations;
  std::vector<std::vector<double>> activations;
};

/// Gradients mirroring a head's parameters, in layer order.
struct HeadGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  /// Allocates zeroed gradients shaped like `head`.
  static HeadGradients zeros_like(const ModelHead& head);
  void set_zero();
  void scale(double factor);
};

/// Builds a head with the given hidden widths. Weights are zero-mean normal
/// scaled by sqrt(2 / fan_in); biases start at zero. Identical seeds yield
/// bitwise-identical heads.
ModelHead init_head(int in_dim, std::span<const int> hidden_dims, int k,
                    std::uint64_t seed);

/// Runs the head on one embedding, returning the K logits. When `trace` is
/// non-null it is overwritten with everything backward() needs.
std::vector<double> forward(const ModelHead& head, std::span<const double> embedding,
                            ForwardTrace* trace = nullptr);

/// Exact gradients of a scalar loss with respect to every weight and bias,
/// given d loss / d logits. The trace must come from a forward() call on the
/// same head (shape-checked; InvalidStateError otherwise). Gradients are
/// accumulated into `grads` so batch sums need no temporaries.
void backward_accumulate(const ModelHead& head, const ForwardTrace& trace,
                         std::span<const double> dloss_dlogits, HeadGradients& grads);

/// Convenience wrapper returning fresh gradients.
HeadGradients backward(const ModelHead& head, const ForwardTrace& trace,
                       std::span<const double> dloss_dlogits);

/// A trained head bundled with the grid it predicts over, the loss settings
/// it was trained with and a free-form label for reports.
struct Checkpoint {
  ModelHead head;
  AgeGrid grid{1, 100};
  HybridLossConfig loss;
  std::string label = "ldl";
};

/// Writes the checkpoint as a self-describing text document. Every value is
/// printed with 17 significant digits, so loading reproduces the head
/// bitwise.
void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ldlage

#endif  // LDLAGE_MODEL_HPP_
