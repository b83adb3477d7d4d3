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

#include "pnas/archspec.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pnas/costmodel.h"
#include "pnas/error.h"

namespace pnas {

namespace {

std::string layer_prefix(std::size_t i) { return "layer " + std::to_string(i) + ": "; }

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

std::string_view to_string(Padding p) { return p == Padding::kSame ? "same" : "valid"; }

Padding parse_padding(std::string_view s) {
  if (s == "same") return Padding::kSame;
  if (s == "valid") return Padding::kValid;
  throw ParseError("unknown padding '" + std::string(s) + "' (expected same|valid)");
}

void validate_solver(const SolverSettings& s) {
  if (!(s.learning_rate > 0) || !std::isfinite(s.learning_rate))
    throw ValidationError("solver: learning rate must be > 0");
  if (s.batch_size < 1) throw ValidationError("solver: batch size must be >= 1");
  if (s.iterations < 1) throw ValidationError("solver: iterations must be >= 1");
  if (s.lr_decay && (!(s.lr_decay->factor > 0) || s.lr_decay->every < 1))
    throw ValidationError("solver: decay needs factor > 0 and every >= 1");
}

const NetworkArch& validate_arch(const NetworkArch& arch) {
  const auto& in = arch.input;
  if (in.c < 1 || in.h < 1 || in.w < 1)
    throw ValidationError("input shape fields must be >= 1");
  if (arch.layers.empty()) throw ValidationError("architecture has no layers");
  TensorShape shape = in;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& l = arch.layers[i];
    if (l.kh < 1 || l.kw < 1) throw ValidationError(layer_prefix(i) + "kernel dims must be >= 1");
    if (l.m < 1) throw ValidationError(layer_prefix(i) + "filter count must be >= 1");
    if (l.sh < 1 || l.sw < 1) throw ValidationError(layer_prefix(i) + "strides must be >= 1");
    if (l.padding == Padding::kValid && (l.kh > shape.h || l.kw > shape.w)) {
      throw ValidationError(layer_prefix(i) + "kernel exceeds input (" + std::to_string(l.kh) +
                            "x" + std::to_string(l.kw) + " on " + std::to_string(shape.h) + "x" +
                            std::to_string(shape.w) + ")");
    }
    shape = out_shape(l, shape);
  }
  return arch;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::kKH: return "kh";
    case ParamKind::kKW: return "kw";
    case ParamKind::kM: return "m";
    case ParamKind::kLR: return "lr";
    case ParamKind::kBatchSize: return "batch";
    case ParamKind::kIterations: return "iterations";
  }
  return "?";
}

ParamKind parse_param_kind(std::string_view s) {
  for (auto k : {ParamKind::kKH, ParamKind::kKW, ParamKind::kM, ParamKind::kLR,
                 ParamKind::kBatchSize, ParamKind::kIterations}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown parameter kind '" + std::string(s) + "'");
}

std::string to_string(const ParamId& id) {
  if (!is_layer_kind(id.kind)) return std::string(to_string(id.kind));
  return std::to_string(id.layer) + ":" + std::string(to_string(id.kind));
}

ParamId parse_param_id(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    auto k = parse_param_kind(s);
    if (is_layer_kind(k)) throw ParseError("layer parameter '" + std::string(s) + "' needs a layer");
    return ParamId::of_solver(k);
  }
  int layer = 0;
  auto digits = s.substr(0, colon);
  if (digits.empty()) throw ParseError("bad parameter id '" + std::string(s) + "'");
  for (char c : digits) {
    if (c < '0' || c > '9') throw ParseError("bad parameter id '" + std::string(s) + "'");
    layer = layer * 10 + (c - '0');
  }
  auto k = parse_param_kind(s.substr(colon + 1));
  if (!is_layer_kind(k)) throw ParseError("solver parameter '" + std::string(s) + "' takes no layer");
  return ParamId::of_layer(layer, k);
}

std::uint64_t ParamDomain::cardinality() const {
  if (continuous()) throw ValidationError(to_string(id) + ": continuous domain has no cardinality");
  return static_cast<std::uint64_t>(std::floor((upper - lower) / step)) + 1;
}

double ParamDomain::value_at(std::uint64_t index) const {
  return lower + static_cast<double>(index) * step;
}

std::uint64_t ParamDomain::index_of(double value) const {
  return static_cast<std::uint64_t>(std::llround((value - lower) / step));
}

bool ParamDomain::contains(double value) const {
  if (!std::isfinite(value) || value < lower || value > upper) return false;
  if (continuous()) return true;
  if (!is_integral(value)) return false;
  return std::fmod(value - lower, step) == 0.0;
}

const ParamDomain* SearchSpace::find(const ParamId& id) const {
  auto it = std::lower_bound(domains.begin(), domains.end(), id,
                             [](const ParamDomain& d, const ParamId& k) { return d.id < k; });
  return (it != domains.end() && it->id == id) ? &*it : nullptr;
}

bool SearchSpace::all_frozen() const {
  return std::all_of(domains.begin(), domains.end(), [](const auto& d) { return d.frozen.has_value(); });
}

void validate_space(const SearchSpace& space) {
  validate_arch(space.seed);
  const int n_layers = static_cast<int>(space.seed.layers.size());
  std::set<ParamId> seen;
  for (const auto& d : space.domains) {
    const auto name = to_string(d.id);
    if (is_layer_kind(d.id.kind)) {
      if (d.id.layer < 0 || d.id.layer >= n_layers)
        throw ValidationError(name + ": layer index out of range");
    } else if (d.id.layer != -1) {
      throw ValidationError(name + ": solver parameter carries a layer index");
    }
    if (!seen.insert(d.id).second) throw ValidationError(name + ": duplicate domain");
    if (!(d.lower <= d.upper)) throw ValidationError(name + ": lower bound exceeds upper bound");
    if (d.continuous()) {
      if (!(d.lower > 0) || !std::isfinite(d.upper))
        throw ValidationError(name + ": learning-rate bounds must be positive and finite");
    } else {
      if (!is_integral(d.lower) || !is_integral(d.upper) || !is_integral(d.step))
        throw ValidationError(name + ": integer domain needs integral bounds and step");
      if (d.lower < 1) throw ValidationError(name + ": lower bound must be >= 1");
      if (d.step < 1) throw ValidationError(name + ": step must be >= 1");
    }
    if (d.frozen && !d.contains(*d.frozen))
      throw ValidationError(name + ": frozen value outside domain");
  }
  if (!std::is_sorted(space.domains.begin(), space.domains.end(),
                      [](const auto& a, const auto& b) { return a.id < b.id; }))
    throw ValidationError("domains must be sorted by parameter id");
  for (int l = 0; l < n_layers; ++l) {
    for (auto k : {ParamKind::kKH, ParamKind::kKW, ParamKind::kM}) {
      if (!seen.count(ParamId::of_layer(l, k)))
        throw ValidationError(to_string(ParamId::of_layer(l, k)) + ": missing domain");
    }
  }
}

SearchSpace derive_space(const NetworkArch& seed, const BoundsPolicy& policy) {
  validate_arch(seed);
  SearchSpace space{seed, {}};
  for (std::size_t i = 0; i < seed.layers.size(); ++i) {
    const auto& l = seed.layers[i];
    const int li = static_cast<int>(i);
    const bool from_seed = i == 0 && policy.first_layer_kernel_from_seed;
    const double kh_hi = from_seed ? l.kh : policy.kernel_upper;
    const double kw_hi = from_seed ? l.kw : policy.kernel_upper;
    space.domains.push_back({ParamId::of_layer(li, ParamKind::kKH), 1, kh_hi, 1, std::nullopt});
    space.domains.push_back({ParamId::of_layer(li, ParamKind::kKW), 1, kw_hi, 1, std::nullopt});
    space.domains.push_back({ParamId::of_layer(li, ParamKind::kM), 1, static_cast<double>(l.m),
                             static_cast<double>(policy.m_step), std::nullopt});
  }
  return space;
}

double space_size(const SearchSpace& space) {
  double size = 1;
  for (const auto& d : space.domains) {
    if (d.frozen) continue;
    if (d.continuous()) return std::numeric_limits<double>::infinity();
    size *= static_cast<double>(d.cardinality());
  }
  return size;
}

void check_assignment(const SearchSpace& space, const Assignment& a) {
  for (const auto& [id, v] : a) {
    const auto* d = space.find(id);
    if (!d) throw ValidationError(to_string(id) + ": not a parameter of the space");
    if (d->frozen && *d->frozen != v)
      throw ValidationError(to_string(id) + ": contradicts frozen value " +
                            std::to_string(*d->frozen));
    if (!d->contains(v)) throw ValidationError(to_string(id) + ": value out of bounds");
  }
  for (const auto& d : space.domains) {
    if (!d.frozen && !a.count(d.id))
      throw ValidationError(to_string(d.id) + ": missing from assignment");
  }
}

Assignment complete_assignment(const SearchSpace& space, const Assignment& a) {
  check_assignment(space, a);
  Assignment full = a;
  for (const auto& d : space.domains) {
    if (d.frozen) full[d.id] = *d.frozen;
  }
  return full;
}

NetworkArch apply_assignment(const SearchSpace& space, const Assignment& a) {
  const auto full = complete_assignment(space, a);
  NetworkArch arch = space.seed;
  for (const auto& [id, v] : full) {
    if (!is_layer_kind(id.kind)) continue;
    auto& l = arch.layers.at(static_cast<std::size_t>(id.layer));
    const auto iv = static_cast<std::int64_t>(v);
    switch (id.kind) {
      case ParamKind::kKH: l.kh = iv; break;
      case ParamKind::kKW: l.kw = iv; break;
      case ParamKind::kM: l.m = iv; break;
      default: break;
    }
  }
  validate_arch(arch);
  return arch;
}

Assignment extract_assignment(const SearchSpace& space, const NetworkArch& arch) {
  if (arch.layers.size() != space.seed.layers.size() || arch.input != space.seed.input)
    throw ValidationError("architecture does not share the seed's structure");
  Assignment a;
  for (const auto& d : space.domains) {
    if (!is_layer_kind(d.id.kind)) {
      if (d.frozen) a[d.id] = *d.frozen;
      continue;
    }
    const auto& l = arch.layers[static_cast<std::size_t>(d.id.layer)];
    const auto& s = space.seed.layers[static_cast<std::size_t>(d.id.layer)];
    if (l.sh != s.sh || l.sw != s.sw || l.padding != s.padding)
      throw ValidationError("layer " + std::to_string(d.id.layer) + ": stride/padding differ from seed");
    switch (d.id.kind) {
      case ParamKind::kKH: a[d.id] = static_cast<double>(l.kh); break;
      case ParamKind::kKW: a[d.id] = static_cast<double>(l.kw); break;
      case ParamKind::kM: a[d.id] = static_cast<double>(l.m); break;
      default: break;
    }
  }
  check_assignment(space, a);
  return a;
}

SearchSpace freeze_param(SearchSpace space, const ParamId& id, double value) {
  auto it = std::find_if(space.domains.begin(), space.domains.end(),
                         [&](const auto& d) { return d.id == id; });
  if (it == space.domains.end()) throw ValidationError(to_string(id) + ": unknown parameter");
  if (!it->contains(value)) throw ValidationError(to_string(id) + ": freeze value out of bounds");
  if (it->frozen && *it->frozen != value)
    throw ValidationError(to_string(id) + ": already frozen at a different value");
  it->frozen = value;
  return space;
}

SolverSettings apply_solver(SolverSettings base, const Assignment& a) {
  for (const auto& [id, v] : a) {
    switch (id.kind) {
      case ParamKind::kLR: base.learning_rate = v; break;
      case ParamKind::kBatchSize: base.batch_size = static_cast<std::int64_t>(v); break;
      case ParamKind::kIterations: base.iterations = static_cast<std::int64_t>(v); break;
      default: break;
    }
  }
  return base;
}

}  // namespace pnas
