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

#include "pnas/tpe.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnas/error.h"
#include "pnas/hash.h"

namespace pnas {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// P(a < Z < b) for standard normal Z, arranged to avoid cancellation in the
// tails.
double normal_mass(double a, double b) {
  if (a >= 0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  if (b <= 0) return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  return 1.0 - 0.5 * std::erfc(-a / kSqrt2) - 0.5 * std::erfc(b / kSqrt2);
}

double clamp_to(const ParamDomain& d, double v) { return std::clamp(v, d.lower, d.upper); }

}  // namespace

void validate_tpe_config(const TpeConfig& c) {
  if (!(c.gamma > 0 && c.gamma < 1)) throw ValidationError("tpe: gamma must lie in (0, 1)");
  if (c.n_startup < 1) throw ValidationError("tpe: n_startup must be >= 1");
  if (c.n_candidates < 1) throw ValidationError("tpe: n_candidates must be >= 1");
  if (!(c.prior_weight > 0)) throw ValidationError("tpe: prior weight must be > 0");
}

TpeState observe(TpeState state, const SearchSpace& space, Observation obs) {
  check_assignment(space, obs.assignment);
  if (!(obs.objective >= 0 && obs.objective <= 1))
    throw ValidationError("tpe: objective outside [0, 1]");
  state.observations.push_back(std::move(obs));
  return state;
}

std::size_t good_set_size(double gamma, std::size_t n) {
  const auto g = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n)));
  return std::max<std::size_t>(1, g);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_observations(
    const TpeState& state) {
  const auto& obs = state.observations;
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return obs[a].objective > obs[b].objective;
  });
  const auto n_good = std::min(order.size(), good_set_size(state.config.gamma, obs.size()));
  std::vector<std::size_t> good(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  std::vector<std::size_t> bad(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());
  std::sort(good.begin(), good.end());
  std::sort(bad.begin(), bad.end());
  return {std::move(good), std::move(bad)};
}

// ---------------------------------------------------------------------------

ParzenEstimator::ParzenEstimator(const ParamDomain& domain, std::vector<double> centers,
                                 double prior_weight)
    : domain_(domain), prior_weight_(prior_weight) {
  const double n = static_cast<double>(centers.size());
  if (domain_.continuous()) {
    lo_ = std::log(domain_.lower);
    hi_ = std::log(domain_.upper);
    const double range = hi_ - lo_;
    sigma_ = range > 0 ? std::max(0.01 * range, range / std::max(1.0, std::sqrt(n))) : 1.0;
  } else {
    lo_ = domain_.lower - domain_.step / 2;
    hi_ = domain_.upper + domain_.step / 2;
    sigma_ = std::max(1.0, (domain_.upper - domain_.lower) / std::max(1.0, std::sqrt(n)));
  }
  centers_.reserve(centers.size());
  for (double c : centers) centers_.push_back(to_axis(c));
}

double ParzenEstimator::to_axis(double value) const {
  return domain_.continuous() ? std::log(value) : value;
}

double ParzenEstimator::from_axis(double x) const {
  return domain_.continuous() ? clamp_to(domain_, std::exp(x)) : x;
}

double ParzenEstimator::kernel(double center, double x) const {
  const double z_lo = (lo_ - center) / sigma_;
  const double z_hi = (hi_ - center) / sigma_;
  const double norm = normal_mass(z_lo, z_hi);
  if (domain_.continuous()) {
    const double z = (x - center) / sigma_;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) / sigma_ / norm;
  }
  const double h = domain_.step / 2;
  return normal_mass((x - h - center) / sigma_, (x + h - center) / sigma_) / norm;
}

double ParzenEstimator::pdf(double value) const {
  if (domain_.continuous() && hi_ == lo_) return 1.0;
  if (!domain_.continuous() && domain_.cardinality() == 1) return 1.0;
  const double x = to_axis(value);
  double sum = 0;
  for (double c : centers_) sum += kernel(c, x);
  const double uniform = domain_.continuous() ? 1.0 / (hi_ - lo_)
                                              : 1.0 / static_cast<double>(domain_.cardinality());
  sum += prior_weight_ * uniform;
  return sum / (static_cast<double>(centers_.size()) + prior_weight_);
}

double ParzenEstimator::sample_kernel(double center, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(center, sigma_);
  double x = normal(rng);
  while (!(x >= lo_ && x < hi_)) x = normal(rng);
  if (domain_.continuous()) return from_axis(x);
  auto idx = static_cast<std::uint64_t>(std::floor((x - lo_) / domain_.step));
  return domain_.value_at(std::min(idx, domain_.cardinality() - 1));
}

double ParzenEstimator::sample(std::mt19937_64& rng) const {
  if (domain_.continuous() && hi_ == lo_) return domain_.lower;
  if (!domain_.continuous() && domain_.cardinality() == 1) return domain_.lower;
  const double total = static_cast<double>(centers_.size()) + prior_weight_;
  std::uniform_real_distribution<double> pick(0.0, total);
  const double r = pick(rng);
  if (r < static_cast<double>(centers_.size())) {
    return sample_kernel(centers_[static_cast<std::size_t>(r)], rng);
  }
  if (domain_.continuous()) {
    std::uniform_real_distribution<double> u(lo_, hi_);
    return from_axis(u(rng));
  }
  std::uniform_int_distribution<std::uint64_t> u(0, domain_.cardinality() - 1);
  return domain_.value_at(u(rng));
}

// ---------------------------------------------------------------------------

TpeModel::TpeModel(const TpeState& state, const SearchSpace& space) {
  const auto [good_idx, bad_idx] = split_observations(state);
  auto centers_of = [&](const ParamId& id, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (auto i : idx) {
      const auto& a = state.observations[i].assignment;
      auto it = a.find(id);
      if (it == a.end()) throw ValidationError("tpe: observation lacks " + to_string(id));
      out.push_back(it->second);
    }
    return out;
  };
  for (const auto& d : space.domains) {
    if (d.frozen) continue;
    params_.push_back(d);
    good_.emplace_back(d, centers_of(d.id, good_idx), state.config.prior_weight);
    bad_.emplace_back(d, centers_of(d.id, bad_idx), state.config.prior_weight);
  }
}

double TpeModel::log_ratio(const Assignment& a) const {
  double lr = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double v = a.at(params_[i].id);
    lr += std::log(good_[i].pdf(v)) - std::log(bad_[i].pdf(v));
  }
  return lr;
}

Assignment TpeModel::sample_good(std::mt19937_64& rng) const {
  Assignment a;
  for (std::size_t i = 0; i < params_.size(); ++i) a[params_[i].id] = good_[i].sample(rng);
  return a;
}

double density_ratio(const TpeState& state, const SearchSpace& space, const Assignment& a) {
  validate_tpe_config(state.config);
  if (state.observations.size() < static_cast<std::size_t>(state.config.n_startup))
    throw ValidationError("tpe: insufficient history for a density model");
  check_assignment(space, a);
  return std::exp(TpeModel(state, space).log_ratio(a));
}

Assignment sample_uniform(const SearchSpace& space, std::mt19937_64& rng) {
  Assignment a;
  for (const auto& d : space.domains) {
    if (d.frozen) {
      a[d.id] = *d.frozen;
    } else if (d.continuous()) {
      std::uniform_real_distribution<double> u(std::log(d.lower), std::log(d.upper));
      a[d.id] = clamp_to(d, std::exp(u(rng)));
    } else {
      std::uniform_int_distribution<std::uint64_t> u(0, d.cardinality() - 1);
      a[d.id] = d.value_at(u(rng));
    }
  }
  return a;
}

Assignment suggest(const TpeState& state, const SearchSpace& space, std::uint64_t draw_index) {
  validate_tpe_config(state.config);
  if (space.all_frozen()) throw ValidationError("tpe: every parameter is frozen");
  std::mt19937_64 rng(combine_seed(state.config.rng_seed, draw_index));
  if (state.observations.size() < static_cast<std::size_t>(state.config.n_startup))
    return sample_uniform(space, rng);

  const TpeModel model(state, space);
  Assignment best;
  double best_score = 0;
  for (int i = 0; i < state.config.n_candidates; ++i) {
    auto cand = model.sample_good(rng);
    const double score = model.log_ratio(cand);
    if (i == 0 || score > best_score) {
      best = std::move(cand);
      best_score = score;
    }
  }
  for (const auto& d : space.domains) {
    if (d.frozen) best[d.id] = *d.frozen;
  }
  return best;
}

}  // namespace pnas
