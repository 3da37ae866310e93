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
#include "dsim/learn/mlp.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace dsim {

int MlpShape::num_params() const {
  int n = 0;
  for (int l = 0; l < num_layers(); ++l) n += fan_out(l) * (fan_in(l) + 1);
  return n;
}

Mlp::Mlp(MlpShape shape) : shape_(std::move(shape)) {
  if (shape_.input < 1 || shape_.output < 1) {
    throw std::invalid_argument("Mlp: input and output sizes must be >= 1");
  }
  for (int h : shape_.hidden) {
    if (h < 1) throw std::invalid_argument("Mlp: hidden sizes must be >= 1");
  }
}

std::vector<double> Mlp::init(std::uint64_t seed, double output_gain) const {
  std::vector<double> p(num_params(), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t off = 0;
  for (int l = 0; l < shape_.num_layers(); ++l) {
    const int in = shape_.fan_in(l);
    const int out = shape_.fan_out(l);
    double bound = std::sqrt(6.0 / (in + out));
    if (l == shape_.num_layers() - 1) bound *= output_gain;
    std::uniform_real_distribution<double> u(-bound, bound);
    for (int i = 0; i < in * out; ++i) p[off + i] = u(rng);
    off += static_cast<std::size_t>(in * out + out);
  }
  return p;
}

std::vector<double> Mlp::forward(std::span<const double> params,
                                 std::span<const double> x,
                                 MlpCache* cache) const {
  if (static_cast<int>(x.size()) != shape_.input) {
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  }
  if (static_cast<int>(params.size()) != num_params()) {
    throw std::invalid_argument("Mlp::forward: parameter count mismatch");
  }
  std::vector<double> a(x.begin(), x.end());
  if (cache != nullptr) {
    cache->acts.clear();
    cache->acts.push_back(a);
  }
  std::size_t off = 0;
  const int layers = shape_.num_layers();
  for (int l = 0; l < layers; ++l) {
    const int in = shape_.fan_in(l);
    const int out = shape_.fan_out(l);
    const double* w = params.data() + off;
    const double* b = w + in * out;
    std::vector<double> z(out);
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + o * in;
      for (int i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = l + 1 < layers ? std::tanh(s) : s;
    }
    a = std::move(z);
    if (cache != nullptr) cache->acts.push_back(a);
    off += static_cast<std::size_t>(in * out + out);
  }
  return a;
}

std::vector<double> Mlp::backward(std::span<const double> params,
                                  const MlpCache& cache,
                                  std::span<const double> out_grad,
                                  std::span<double> param_grad) const {
  const int layers = shape_.num_layers();
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (int l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(shape_.fan_out(l) * (shape_.fan_in(l) + 1));
  }
  const bool want_params = !param_grad.empty();
  std::vector<double> g(out_grad.begin(), out_grad.end());
  for (int l = layers - 1; l >= 0; --l) {
    const int in = shape_.fan_in(l);
    const int out = shape_.fan_out(l);
    const std::vector<double>& a_in = cache.acts[l];
    if (l + 1 < layers) {
      // Through tanh: dz = g * (1 - y^2).
      const std::vector<double>& y = cache.acts[l + 1];
      for (int o = 0; o < out; ++o) g[o] *= 1.0 - y[o] * y[o];
    }
    const double* w = params.data() + offsets[l];
    if (want_params) {
      double* gw = param_grad.data() + offsets[l];
      double* gb = gw + in * out;
      for (int o = 0; o < out; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        double* row = gw + o * in;
        for (int i = 0; i < in; ++i) row[i] += go * a_in[i];
        gb[o] += go;
      }
    }
    std::vector<double> gi(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      const double* row = w + o * in;
      for (int i = 0; i < in; ++i) gi[i] += go * row[i];
    }
    g = std::move(gi);
  }
  return g;
}

std::vector<ad::Var> Mlp::forward_var(std::span<const double> params,
                                      std::span<const ad::Var> x,
                                      std::span<double> param_grad) const {
  ad::Tape& tape = ad::detail::require_active();
  std::vector<double> xv(x.size());
  std::vector<ad::NodeIndex> idx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xv[i] = x[i].value();
    idx[i] = x[i].index();
  }
  auto cache = std::make_shared<MlpCache>();
  const std::vector<double> y = forward(params, xv, cache.get());
  auto backward_fn = [this, params, param_grad, cache, idx = std::move(idx)](
                         std::span<const double> out_adj, std::span<double> adj) {
    const std::vector<double> gx = backward(params, *cache, out_adj, param_grad);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= 0) adj[idx[i]] += gx[i];
    }
  };
  return tape.block(x, y, std::move(backward_fn));
}

}  // namespace dsim
