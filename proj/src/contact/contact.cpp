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

#include "dsim/contact/contact.hpp"

#include <stdexcept>

namespace dsim {

std::string to_string(ContactKind kind) {
  switch (kind) {
    case ContactKind::kHard:
      return "hard";
    case ContactKind::kSoft:
      return "soft";
    case ContactKind::kSmooth:
      return "smooth";
  }
  return "unknown";
}

ContactKind contact_kind_from_string(const std::string& name) {
  if (name == "hard") return ContactKind::kHard;
  if (name == "soft") return ContactKind::kSoft;
  if (name == "smooth") return ContactKind::kSmooth;
  throw std::invalid_argument("unknown contact model '" + name +
                              "' (expected hard, soft or smooth)");
}

void ContactModelConfig::validate() const {
  if (!(sharpness > 0.0)) throw std::invalid_argument("contact.sharpness must be > 0");
  if (!(stiffness > 0.0)) throw std::invalid_argument("contact.stiffness must be > 0");
  if (!(damping >= 0.0)) throw std::invalid_argument("contact.damping must be >= 0");
  if (!(friction >= 0.0)) throw std::invalid_argument("contact.friction must be >= 0");
  if (!(restitution >= 0.0 && restitution <= 1.0)) {
    throw std::invalid_argument("contact.restitution must be in [0, 1]");
  }
  if (gs_iters < 1) throw std::invalid_argument("contact.gs_iters must be >= 1");
  if (!(gs_tol > 0.0)) throw std::invalid_argument("contact.gs_tol must be > 0");
  if (!(margin_factor >= 3.0)) {
    throw std::invalid_argument("contact.margin_factor must be >= 3");
  }
  if (!(soft_slip_velocity > 0.0)) {
    throw std::invalid_argument("contact.soft_slip_velocity must be > 0");
  }
}

}  // namespace dsim
