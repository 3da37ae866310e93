// Copyright 2026 The dsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Fully connected network with tanh hidden layers and a linear output,
// stored as one flat parameter vector. Layer l occupies W_l (out x in,
// row-major) followed by b_l (out).
//
// The double forward/backward pair is used for rollouts that need no
// simulator gradients (PPO, evaluation, critic regression). forward_var
// records the whole network as a single tape block whose backward pass
// also accumulates parameter gradients into a caller-owned buffer.

#include <cstdint>
#include <span>
#include <vector>

#include "dsim/ad/tape.hpp"

namespace dsim {

struct MlpShape {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  int num_layers() const { return static_cast<int>(hidden.size()) + 1; }
  int fan_in(int layer) const { return layer == 0 ? input : hidden[layer - 1]; }
  int fan_out(int layer) const {
    return layer == num_layers() - 1 ? output : hidden[layer];
  }
  int num_params() const;
  bool operator==(const MlpShape&) const = default;
};

/// Per-layer activations from a double forward pass; acts[0] is the input,
/// acts.back() the output.
struct MlpCache {
  std::vector<std::vector<double>> acts;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpShape shape);

  const MlpShape& shape() const { return shape_; }
  int num_params() const { return shape_.num_params(); }

  /// Xavier-uniform weights, zero biases; the output layer is scaled by
  /// `output_gain`.
  std::vector<double> init(std::uint64_t seed, double output_gain) const;

  std::vector<double> forward(std::span<const double> params,
                              std::span<const double> x,
                              MlpCache* cache = nullptr) const;

  /// Adds dL/dparams to `param_grad` and returns dL/dx for dL/dy = `out_grad`.
  std::vector<double> backward(std::span<const double> params,
                               const MlpCache& cache,
                               std::span<const double> out_grad,
                               std::span<double> param_grad) const;

  /// Records the network on the active tape. `params` must outlive the
  /// reverse sweep; parameter gradients are added to `param_grad` (may be
  /// empty to skip them).
  std::vector<ad::Var> forward_var(std::span<const double> params,
                                   std::span<const ad::Var> x,
                                   std::span<double> param_grad) const;

 private:
  MlpShape shape_;
};

}  // namespace dsim
