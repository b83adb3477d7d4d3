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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnas/solver.h"

namespace pnas {

enum class Padding : std::uint8_t { kSame, kValid };

std::string_view to_string(Padding p);
Padding parse_padding(std::string_view s);

struct TensorShape {
  std::int64_t c = 1;
  std::int64_t h = 1;
  std::int64_t w = 1;

  bool operator==(const TensorShape&) const = default;
};

struct ConvLayerSpec {
  std::int64_t kh = 1;
  std::int64_t kw = 1;
  std::int64_t m = 1;  // output feature maps
  std::int64_t sh = 1;
  std::int64_t sw = 1;
  Padding padding = Padding::kSame;

  bool operator==(const ConvLayerSpec&) const = default;
};

// A chain of convolution units. Layer i+1 consumes the m of layer i as its
// channel count; that value is never stored.
struct NetworkArch {
  TensorShape input;
  std::vector<ConvLayerSpec> layers;

  bool operator==(const NetworkArch&) const = default;
};

// Checks every invariant, propagating shapes to verify Valid-padding kernel
// fit. Throws ValidationError naming the first offending layer.
const NetworkArch& validate_arch(const NetworkArch& arch);

// ---------------------------------------------------------------------------
// Search space

enum class ParamKind : std::uint8_t { kKH, kKW, kM, kLR, kBatchSize, kIterations };

constexpr bool is_layer_kind(ParamKind k) {
  return k == ParamKind::kKH || k == ParamKind::kKW || k == ParamKind::kM;
}

std::string_view to_string(ParamKind k);
ParamKind parse_param_kind(std::string_view s);

// Identifies one searchable quantity. Solver kinds carry layer == -1.
// Ordering: layer kinds by (layer, KH<KW<M), then solver kinds.
struct ParamId {
  int layer = -1;
  ParamKind kind = ParamKind::kKH;

  static ParamId of_layer(int layer, ParamKind kind) { return {layer, kind}; }
  static ParamId of_solver(ParamKind kind) { return {-1, kind}; }

  bool operator==(const ParamId&) const = default;
  std::strong_ordering operator<=>(const ParamId& o) const {
    const bool a = !is_layer_kind(kind), b = !is_layer_kind(o.kind);
    if (a != b) return a <=> b;
    if (auto c = layer <=> o.layer; c != 0) return c;
    return kind <=> o.kind;
  }
};

// "3:kh", "0:m", "lr", "batch", "iterations".
std::string to_string(const ParamId& id);
ParamId parse_param_id(std::string_view s);

// Inclusive bounds. Integer kinds walk lower, lower+step, ... <= upper; the
// learning rate is a log-uniform continuous interval.
struct ParamDomain {
  ParamId id;
  double lower = 1;
  double upper = 1;
  double step = 1;
  std::optional<double> frozen;

  bool continuous() const { return id.kind == ParamKind::kLR; }
  // Number of grid points; only meaningful for integer kinds.
  std::uint64_t cardinality() const;
  double value_at(std::uint64_t index) const;
  std::uint64_t index_of(double value) const;
  bool contains(double value) const;

  bool operator==(const ParamDomain&) const = default;
};

using Assignment = std::map<ParamId, double>;

struct SearchSpace {
  NetworkArch seed;
  std::vector<ParamDomain> domains;  // sorted by id, unique

  const ParamDomain* find(const ParamId& id) const;
  bool all_frozen() const;

  bool operator==(const SearchSpace&) const = default;
};

// Bounds used to derive a space from a seed. The defaults give M in
// [1, seed M], first-layer kernels in [1, seed k], and other kernels in
// [1, 5].
struct BoundsPolicy {
  bool first_layer_kernel_from_seed = true;
  std::int64_t kernel_upper = 5;
  std::int64_t m_step = 1;
};

void validate_space(const SearchSpace& space);

SearchSpace derive_space(const NetworkArch& seed, const BoundsPolicy& policy = {});

// Product of unfrozen domain cardinalities. Infinite when a continuous domain
// is unfrozen.
double space_size(const SearchSpace& space);

// Throws ValidationError unless `a` covers every unfrozen domain, stays in
// bounds, agrees with frozen values and names no unknown parameter.
void check_assignment(const SearchSpace& space, const Assignment& a);

// Completes `a` with the frozen values of the space.
Assignment complete_assignment(const SearchSpace& space, const Assignment& a);

NetworkArch apply_assignment(const SearchSpace& space, const Assignment& a);

// Inverse of apply_assignment for architectures inside the space.
Assignment extract_assignment(const SearchSpace& space, const NetworkArch& arch);

SearchSpace freeze_param(SearchSpace space, const ParamId& id, double value);

// Solver settings with any solver parameters in `a` substituted.
SolverSettings apply_solver(SolverSettings base, const Assignment& a);

}  // namespace pnas
