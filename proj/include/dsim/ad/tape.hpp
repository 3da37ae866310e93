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

// Reverse-mode automatic differentiation on a linear tape.
//
// A Tape is an append-only list of primitive nodes. Each node stores up to
// two parents with their local partial derivatives, so the reverse sweep is
// a single pass over the nodes in reverse order of recording. Vector-valued
// operations with a known vector-Jacobian product (network layers) are
// recorded as blocks so they don't cost one node per multiply-add.
//
// Exactly one tape is active per thread (see TapeScope). A Var that does not
// reference a node is a constant and never touches the tape.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsim::ad {

using NodeIndex = std::int32_t;
inline constexpr NodeIndex kConstantNode = -1;

class Tape;

/// Usage error: no active tape, or operands from different tapes.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or infinity met during the reverse sweep.
class GradientFault : public std::runtime_error {
 public:
  GradientFault(NodeIndex node, const std::string& what)
      : std::runtime_error(what), node_(node) {}
  NodeIndex node() const { return node_; }

 private:
  NodeIndex node_;
};

/// A real value that may participate in the active computation record.
class Var {
 public:
  constexpr Var() = default;
  // Implicit on purpose: literals and plain doubles enter expressions as
  // constants.
  constexpr Var(double value) : value_(value) {}  // NOLINT

  constexpr double value() const { return value_; }
  constexpr NodeIndex index() const { return index_; }
  constexpr std::uint32_t tape_id() const { return tape_id_; }
  constexpr bool is_constant() const { return index_ == kConstantNode; }

 private:
  friend class Tape;
  constexpr Var(double value, NodeIndex index, std::uint32_t tape_id)
      : value_(value), index_(index), tape_id_(tape_id) {}

  double value_ = 0.0;
  NodeIndex index_ = kConstantNode;
  std::uint32_t tape_id_ = 0;
};

/// Reverse pass over a block: receives the adjoints of the block outputs and
/// accumulates into `adjoints`, indexed by node.
using BlockBackward =
    std::function<void(std::span<const double> output_adjoints,
                       std::span<double> adjoints)>;

class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::uint32_t id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }
  void reserve(std::size_t nodes) { nodes_.reserve(nodes); }

  /// Registers an independent variable.
  Var input(double value);

  Var unary(double value, const Var& a, double da) {
    check_owned(a);
    return push(value, Node{a.index(), kConstantNode, da, 0.0});
  }
  Var binary(double value, const Var& a, double da, const Var& b, double db) {
    check_owned(a);
    check_owned(b);
    return push(value, Node{a.index(), b.index(), da, db});
  }

  /// Records a block with the given output values. `backward` must add the
  /// contributions of the output adjoints to the adjoints of whatever input
  /// nodes the block read; `inputs` is only used for record-ownership checks.
  std::vector<Var> block(std::span<const Var> inputs,
                         std::span<const double> output_values,
                         BlockBackward backward);

  /// Full adjoint vector of `output` (one entry per node).
  std::vector<double> backward(const Var& output) const;

  /// d output / d input for each input, by reverse accumulation.
  std::vector<double> gradient(const Var& output,
                               std::span<const Var> inputs) const;

  /// Discards all nodes; Vars from before the clear must not be reused.
  void clear();

  /// The tape active on this thread, or nullptr.
  static Tape* active();

  void check_owned(const Var& v) const {
    if (!v.is_constant() && v.tape_id() != id_) {
      throw UsageError("dsim::ad: Var belongs to a different computation record");
    }
  }

 private:
  friend class TapeScope;

  static constexpr NodeIndex kBlockNode = -2;

  struct Node {
    NodeIndex a = kConstantNode;
    NodeIndex b = kConstantNode;
    double da = 0.0;
    double db = 0.0;
  };
  struct Block {
    NodeIndex first_output;
    NodeIndex num_outputs;
    BlockBackward backward;
  };

  Var push(double value, const Node& node) {
    nodes_.push_back(node);
    return Var(value, static_cast<NodeIndex>(nodes_.size() - 1), id_);
  }

  std::uint32_t id_;
  std::vector<Node> nodes_;
  std::vector<Block> blocks_;
};

/// Activates a tape on the current thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// record_input on the active tape.
Var record_input(double value);

/// Same value, no gradient flow.
inline Var detach(const Var& x) { return Var(x.value()); }
inline double detach(double x) { return x; }

namespace detail {

inline thread_local Tape* active_tape = nullptr;

[[noreturn]] void throw_no_active();

inline Tape& require_active() {
  Tape* t = active_tape;
  if (t == nullptr) throw_no_active();
  return *t;
}

inline Var record_unary(double value, const Var& a, double da) {
  return require_active().unary(value, a, da);
}

inline Var record_binary(double value, const Var& a, double da, const Var& b,
                         double db) {
  return require_active().binary(value, a, da, b, db);
}

}  // namespace detail
}  // namespace dsim::ad
