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

#include "ldlage/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ldlage/error.hpp"
#include "ldlage/rng.hpp"

namespace ldlage {

namespace {

constexpr int kCheckpointVersion = 1;

const char* activation_name(Activation act) {
  return act == Activation::kRectifier ? "rectifier" : "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "rectifier") return Activation::kRectifier;
  if (name == "identity") return Activation::kIdentity;
  throw DataFormatError("checkpoint: unknown activation '" + name + "'");
}

// Shortest decimal that still round-trips a double is irrelevant here; a
// fixed 17 significant digits always does.
void print_double(std::ostream& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out << buf;
}

void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw DataFormatError("checkpoint: expected '" + expected + "', got '" + token + "'");
  }
}

double read_double(std::istream& in, const char* what) {
  double value;
  if (!(in >> value)) {
    throw DataFormatError(std::string("checkpoint: failed to read ") + what);
  }
  return value;
}

int read_int(std::istream& in, const char* what) {
  int value;
  if (!(in >> value)) {
    throw DataFormatError(std::string("checkpoint: failed to read ") + what);
  }
  return value;
}

}  // namespace

std::size_t ModelHead::parameter_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers) {
    count += layer.weight.data().size() + layer.bias.size();
  }
  return count;
}

HeadGradients HeadGradients::zeros_like(const ModelHead& head) {
  HeadGradients grads;
  grads.weight.reserve(head.layers.size());
  grads.bias.reserve(head.layers.size());
  for (const Layer& layer : head.layers) {
    grads.weight.emplace_back(layer.out_dim(), layer.in_dim());
    grads.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return grads;
}

void HeadGradients::set_zero() {
  for (Matrix& w : weight) {
    std::fill(w.data().begin(), w.data().end(), 0.0);
  }
  for (auto& b : bias) {
    std::fill(b.begin(), b.end(), 0.0);
  }
}

void HeadGradients::scale(double factor) {
  for (Matrix& w : weight) {
    for (double& v : w.data()) v *= factor;
  }
  for (auto& b : bias) {
    for (double& v : b) v *= factor;
  }
}

ModelHead init_head(int in_dim, std::span<const int> hidden_dims, int k,
                    std::uint64_t seed) {
  if (in_dim < 1) {
    throw InvalidParameterError("init_head: in_dim must be >= 1");
  }
  if (k < 2) {
    throw InvalidParameterError("init_head: K must be >= 2");
  }
  for (int dim : hidden_dims) {
    if (dim < 1) {
      throw InvalidParameterError("init_head: hidden dims must be >= 1");
    }
  }

  std::vector<int> dims;
  dims.push_back(in_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(k);

  Rng rng(seed);
  ModelHead head;
  head.layers.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.weight = Matrix(dims[l + 1], dims[l]);
    layer.bias.assign(static_cast<std::size_t>(dims[l + 1]), 0.0);
    layer.activation =
        (l + 2 == dims.size()) ? Activation::kIdentity : Activation::kRectifier;
    const double scale = std::sqrt(2.0 / dims[l]);
    for (double& w : layer.weight.data()) {
      w = rng.normal(0.0, scale);
    }
    head.layers.push_back(std::move(layer));
  }
  return head;
}

std::vector<double> forward(const ModelHead& head, std::span<const double> embedding,
                            ForwardTrace* trace) {
  if (head.layers.empty()) {
    throw InvalidStateError("forward: head has no layers");
  }
  if (static_cast<int>(embedding.size()) != head.input_dim()) {
    throw InvalidParameterError(
        "forward: embedding has dimension " + std::to_string(embedding.size()) +
        ", head expects " + std::to_string(head.input_dim()));
  }

  if (trace != nullptr) {
    trace->input.assign(embedding.begin(), embedding.end());
    trace->pre_activations.resize(head.layers.size());
    trace->activations.resize(head.layers.size());
  }

  std::vector<double> current(embedding.begin(), embedding.end());
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    const Layer& layer = head.layers[l];
    std::vector<double> next(static_cast<std::size_t>(layer.out_dim()));
    for (int r = 0; r < layer.out_dim(); ++r) {
      double acc = layer.bias[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer.in_dim(); ++c) {
        acc += layer.weight(r, c) * current[static_cast<std::size_t>(c)];
      }
      next[static_cast<std::size_t>(r)] = acc;
    }
    if (trace != nullptr) {
      trace->pre_activations[l] = next;
    }
    if (layer.activation == Activation::kRectifier) {
      for (double& v : next) {
        v = v > 0.0 ? v : 0.0;
      }
    }
    if (trace != nullptr) {
      trace->activations[l] = next;
    }
    current = std::move(next);
  }
  return current;
}

void backward_accumulate(const ModelHead& head, const ForwardTrace& trace,
                         std::span<const double> dloss_dlogits, HeadGradients& grads) {
  const std::size_t n_layers = head.layers.size();
  if (trace.pre_activations.size() != n_layers ||
      trace.activations.size() != n_layers ||
      static_cast<int>(trace.input.size()) != head.input_dim()) {
    throw InvalidStateError("backward: trace does not match the head architecture");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (static_cast<int>(trace.pre_activations[l].size()) != head.layers[l].out_dim()) {
      throw InvalidStateError("backward: trace layer " + std::to_string(l) +
                              " does not match the head architecture");
    }
  }
  if (static_cast<int>(dloss_dlogits.size()) != head.output_dim()) {
    throw InvalidParameterError("backward: gradient has wrong dimension");
  }
  if (grads.weight.size() != n_layers || grads.bias.size() != n_layers) {
    throw InvalidStateError("backward: gradient buffers do not match the head");
  }

  std::vector<double> delta(dloss_dlogits.begin(), dloss_dlogits.end());
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = head.layers[l];
    if (layer.activation == Activation::kRectifier) {
      const std::vector<double>& pre = trace.pre_activations[l];
      for (int r = 0; r < layer.out_dim(); ++r) {
        // Subgradient 0 at the kink.
        if (pre[static_cast<std::size_t>(r)] <= 0.0) {
          delta[static_cast<std::size_t>(r)] = 0.0;
        }
      }
    }
    const std::vector<double>& input =
        (l == 0) ? trace.input : trace.activations[l - 1];
    Matrix& dw = grads.weight[l];
    std::vector<double>& db = grads.bias[l];
    for (int r = 0; r < layer.out_dim(); ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      db[static_cast<std::size_t>(r)] += d;
      for (int c = 0; c < layer.in_dim(); ++c) {
        dw(r, c) += d * input[static_cast<std::size_t>(c)];
      }
    }
    if (l > 0) {
      std::vector<double> prev(static_cast<std::size_t>(layer.in_dim()), 0.0);
      for (int r = 0; r < layer.out_dim(); ++r) {
        const double d = delta[static_cast<std::size_t>(r)];
        if (d == 0.0) continue;
        for (int c = 0; c < layer.in_dim(); ++c) {
          prev[static_cast<std::size_t>(c)] += d * layer.weight(r, c);
        }
      }
      delta = std::move(prev);
    }
  }
}

HeadGradients backward(const ModelHead& head, const ForwardTrace& trace,
                       std::span<const double> dloss_dlogits) {
  HeadGradients grads = HeadGradients::zeros_like(head);
  backward_accumulate(head, trace, dloss_dlogits, grads);
  return grads;
}

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out << "ldlage-checkpoint version " << kCheckpointVersion << '\n';
  out << "label " << (checkpoint.label.empty() ? "unnamed" : checkpoint.label) << '\n';
  out << "grid " << checkpoint.grid.min_age() << ' ' << checkpoint.grid.max_age() << '\n';
  out << "loss ";
  print_double(out, checkpoint.loss.lambda1);
  out << ' ';
  print_double(out, checkpoint.loss.lambda2);
  out << ' ';
  print_double(out, checkpoint.loss.lambda3);
  out << ' ';
  print_double(out, checkpoint.loss.sigma);
  out << '\n';
  out << "layers " << checkpoint.head.layers.size() << '\n';
  for (std::size_t l = 0; l < checkpoint.head.layers.size(); ++l) {
    const Layer& layer = checkpoint.head.layers[l];
    out << "layer " << l << ' ' << activation_name(layer.activation) << ' '
        << layer.out_dim() << ' ' << layer.in_dim() << '\n';
    out << "weights\n";
    for (int r = 0; r < layer.out_dim(); ++r) {
      for (int c = 0; c < layer.in_dim(); ++c) {
        if (c > 0) out << ' ';
        print_double(out, layer.weight(r, c));
      }
      out << '\n';
    }
    out << "bias\n";
    for (int r = 0; r < layer.out_dim(); ++r) {
      if (r > 0) out << ' ';
      print_double(out, layer.bias[static_cast<std::size_t>(r)]);
    }
    out << '\n';
  }
  out << "end\n";
  if (!out) {
    throw Error("checkpoint: write failed");
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) {
    throw Error("checkpoint: cannot open '" + path.string() + "' for writing");
  }
  save_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(std::istream& in) {
  expect_token(in, "ldlage-checkpoint");
  expect_token(in, "version");
  const int version = read_int(in, "version");
  if (version != kCheckpointVersion) {
    throw DataFormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  expect_token(in, "label");
  std::string label;
  if (!(in >> label)) {
    throw DataFormatError("checkpoint: failed to read label");
  }
  expect_token(in, "grid");
  const int min_age = read_int(in, "grid min age");
  const int max_age = read_int(in, "grid max age");
  expect_token(in, "loss");
  HybridLossConfig loss;
  loss.lambda1 = read_double(in, "lambda1");
  loss.lambda2 = read_double(in, "lambda2");
  loss.lambda3 = read_double(in, "lambda3");
  loss.sigma = read_double(in, "sigma");
  expect_token(in, "layers");
  const int n_layers = read_int(in, "layer count");
  if (n_layers < 1) {
    throw DataFormatError("checkpoint: needs at least one layer");
  }

  Checkpoint checkpoint{.head = {}, .grid = AgeGrid(min_age, max_age),
                        .loss = loss, .label = label};
  checkpoint.head.layers.reserve(static_cast<std::size_t>(n_layers));
  for (int l = 0; l < n_layers; ++l) {
    expect_token(in, "layer");
    const int index = read_int(in, "layer index");
    if (index != l) {
      throw DataFormatError("checkpoint: layer indices out of order");
    }
    std::string act_name;
    if (!(in >> act_name)) {
      throw DataFormatError("checkpoint: failed to read activation");
    }
    const int out_dim = read_int(in, "out dim");
    const int in_dim = read_int(in, "in dim");
    if (out_dim < 1 || in_dim < 1) {
      throw DataFormatError("checkpoint: non-positive layer dimension");
    }
    Layer layer;
    layer.activation = activation_from_name(act_name);
    layer.weight = Matrix(out_dim, in_dim);
    layer.bias.assign(static_cast<std::size_t>(out_dim), 0.0);
    expect_token(in, "weights");
    for (double& w : layer.weight.data()) {
      w = read_double(in, "weight");
    }
    expect_token(in, "bias");
    for (double& b : layer.bias) {
      b = read_double(in, "bias");
    }
    checkpoint.head.layers.push_back(std::move(layer));
  }
  expect_token(in, "end");

  for (std::size_t l = 0; l + 1 < checkpoint.head.layers.size(); ++l) {
    if (checkpoint.head.layers[l].out_dim() != checkpoint.head.layers[l + 1].in_dim()) {
      throw DataFormatError("checkpoint: layer dimensions do not chain");
    }
  }
  if (checkpoint.head.output_dim() != checkpoint.grid.size()) {
    throw DataFormatError("checkpoint: final layer width does not match the grid");
  }
  return checkpoint;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("checkpoint: cannot open '" + path.string() + "'");
  }
  return load_checkpoint(in);
}

}  // namespace ldlage
