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

#include "pnas/costmodel.h"

#include <string>

#include "pnas/error.h"

namespace pnas {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("operation count overflows 64 bits");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("operation count overflows 64 bits");
  return r;
}

TensorShape out_shape(const ConvLayerSpec& layer, const TensorShape& in) {
  if (layer.padding == Padding::kSame) {
    return {layer.m, ceil_div(in.h, layer.sh), ceil_div(in.w, layer.sw)};
  }
  if (layer.kh > in.h || layer.kw > in.w) throw ValidationError("kernel exceeds input");
  return {layer.m, (in.h - layer.kh) / layer.sh + 1, (in.w - layer.kw) / layer.sw + 1};
}

std::uint64_t layer_ops(const ConvLayerSpec& layer, const TensorShape& in) {
  const auto out = out_shape(layer, in);
  auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };
  const std::uint64_t taps = checked_mul(u(layer.kh), u(layer.kw));
  const std::uint64_t per_point = checked_add(checked_mul(2, taps), 1);
  std::uint64_t ops = checked_mul(u(layer.m), u(in.c));
  ops = checked_mul(ops, u(out.h));
  ops = checked_mul(ops, u(out.w));
  return checked_mul(ops, per_point);
}

std::uint64_t layer_params(const ConvLayerSpec& layer, const TensorShape& in) {
  auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };
  return checked_mul(checked_mul(u(layer.m), u(in.c)), checked_mul(u(layer.kh), u(layer.kw)));
}

LayerCost layer_cost(const ConvLayerSpec& layer, const TensorShape& in) {
  return {layer_ops(layer, in), layer_params(layer, in), in, out_shape(layer, in)};
}

NetworkCost network_cost(const NetworkArch& arch) {
  validate_arch(arch);
  NetworkCost cost;
  TensorShape shape = arch.input;
  for (const auto& layer : arch.layers) {
    auto lc = layer_cost(layer, shape);
    cost.total_ops = checked_add(cost.total_ops, lc.ops);
    cost.total_params = checked_add(cost.total_params, lc.params);
    shape = lc.out_shape;
    cost.per_layer.push_back(lc);
  }
  return cost;
}

}  // namespace pnas
