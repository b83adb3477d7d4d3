// Copyright 2026 The pnas Authors. All Rights Reserved.
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

#include <cstdint>
#include <vector>

#include "pnas/archspec.h"

namespace pnas {

// Analytic cost of one convolution unit. All counts are exact integers.
struct LayerCost {
  std::uint64_t ops = 0;     // multiplies + adds
  std::uint64_t params = 0;  // weights, no bias
  TensorShape in_shape;
  TensorShape out_shape;

  bool operator==(const LayerCost&) const = default;
};

struct NetworkCost {
  std::vector<LayerCost> per_layer;
  std::uint64_t total_ops = 0;
  std::uint64_t total_params = 0;

  bool operator==(const NetworkCost&) const = default;
};

// ceil(a / b) for positive operands, as floor((a + b - 1) / b).
constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Same: (M, ceil(H/Sh), ceil(W/Sw)). Valid: (M, (H-kh)/Sh + 1, (W-kw)/Sw + 1).
TensorShape out_shape(const ConvLayerSpec& layer, const TensorShape& in);

// M * C * outH * outW * (2*kh*kw + 1). Throws OverflowError instead of
// wrapping.
std::uint64_t layer_ops(const ConvLayerSpec& layer, const TensorShape& in);

// M * C * kh * kw.
std::uint64_t layer_params(const ConvLayerSpec& layer, const TensorShape& in);

LayerCost layer_cost(const ConvLayerSpec& layer, const TensorShape& in);

NetworkCost network_cost(const NetworkArch& arch);

// Checked helpers, exposed for the CLI and engine.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);

}  // namespace pnas
