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

#include "dsim/ad/tape.hpp"

#include <atomic>
#include <cmath>

namespace dsim::ad {
namespace {

std::atomic<std::uint32_t> g_next_tape_id{1};

}  // namespace

Tape::Tape() : id_(g_next_tape_id.fetch_add(1, std::memory_order_relaxed)) {}

Var Tape::input(double value) { return push(value, Node{}); }

std::vector<Var> Tape::block(std::span<const Var> inputs,
                             std::span<const double> output_values,
                             BlockBackward backward) {
  for (const Var& v : inputs) check_owned(v);
  const auto first = static_cast<NodeIndex>(nodes_.size());
  const auto block_id = static_cast<NodeIndex>(blocks_.size());
  std::vector<Var> outputs;
  outputs.reserve(output_values.size());
  for (double v : output_values) {
    outputs.push_back(push(v, Node{kBlockNode, block_id, 0.0, 0.0}));
  }
  blocks_.push_back(Block{first, static_cast<NodeIndex>(output_values.size()),
                          std::move(backward)});
  return outputs;
}

std::vector<double> Tape::backward(const Var& output) const {
  check_owned(output);
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output.is_constant()) return adj;
  adj[output.index()] = 1.0;
  for (NodeIndex i = output.index(); i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.a == kBlockNode) {
      const Block& blk = blocks_[n.b];
      // Outputs are contiguous and independent of each other; run the block
      // once, when the sweep reaches its first output.
      if (i != blk.first_output) continue;
      std::span<const double> out_adj(adj.data() + blk.first_output,
                                      static_cast<std::size_t>(blk.num_outputs));
      bool any = false;
      for (double a : out_adj) {
        if (!std::isfinite(a)) {
          throw GradientFault(i, "dsim::ad: non-finite adjoint at block node " +
                                     std::to_string(i));
        }
        any = any || a != 0.0;
      }
      if (any) blk.backward(out_adj, adj);
      continue;
    }
    const double g = adj[i];
    if (g == 0.0) continue;
    if (!std::isfinite(g)) {
      throw GradientFault(i, "dsim::ad: non-finite adjoint at node " +
                                 std::to_string(i));
    }
    if (n.a >= 0) adj[n.a] += n.da * g;
    if (n.b >= 0) adj[n.b] += n.db * g;
  }
  return adj;
}

std::vector<double> Tape::gradient(const Var& output,
                                   std::span<const Var> inputs) const {
  for (const Var& v : inputs) check_owned(v);
  const std::vector<double> adj = backward(output);
  std::vector<double> grad;
  grad.reserve(inputs.size());
  for (const Var& v : inputs) {
    grad.push_back(v.is_constant() ? 0.0 : adj[v.index()]);
  }
  return grad;
}

void Tape::clear() {
  nodes_.clear();
  blocks_.clear();
  // Invalidate outstanding Vars.
  id_ = g_next_tape_id.fetch_add(1, std::memory_order_relaxed);
}

Tape* Tape::active() { return detail::active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(detail::active_tape) {
  detail::active_tape = &tape;
}

TapeScope::~TapeScope() { detail::active_tape = previous_; }

Var record_input(double value) { return detail::require_active().input(value); }

namespace detail {

void throw_no_active() {
  throw UsageError("dsim::ad: no active computation record");
}

}  // namespace detail
}  // namespace dsim::ad
