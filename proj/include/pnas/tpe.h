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
#include <random>
#include <span>
#include <vector>

#include "pnas/archspec.h"

namespace pnas {

struct TpeConfig {
  double gamma = 0.25;        // fraction of observations forming the "good" set
  int n_startup = 20;         // suggestions drawn uniformly before modelling
  int n_candidates = 24;      // draws from l(x) scored per suggestion
  double prior_weight = 1.0;  // weight of the uniform kernel in each mixture
  std::uint64_t rng_seed = 0;
};

void validate_tpe_config(const TpeConfig& c);

struct Observation {
  Assignment assignment;
  double objective = 0;  // higher is better, in [0, 1]
};

struct TpeState {
  TpeConfig config;
  std::vector<Observation> observations;  // append-only
};

// Appends `obs` after checking it against the space.
TpeState observe(TpeState state, const SearchSpace& space, Observation obs);

// Size of the good set for n observations: max(1, ceil(gamma * n)).
std::size_t good_set_size(double gamma, std::size_t n);

// Splits observation indices into (good, bad). Sorted by objective
// descending; ties resolved earlier-observed first.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_observations(
    const TpeState& state);

// Parzen mixture over one domain: one truncated Gaussian per center plus a
// uniform prior kernel. Integer domains are discretized into bins of width
// `step` around each grid point; the learning rate is modelled in log space.
class ParzenEstimator {
 public:
  ParzenEstimator(const ParamDomain& domain, std::vector<double> centers, double prior_weight);

  // Probability mass (integer kinds) or log-space density (learning rate).
  double pdf(double value) const;
  double sample(std::mt19937_64& rng) const;

  double bandwidth() const { return sigma_; }

 private:
  double kernel(double center, double x) const;
  double sample_kernel(double center, std::mt19937_64& rng) const;
  double to_axis(double value) const;
  double from_axis(double x) const;

  ParamDomain domain_;
  std::vector<double> centers_;  // on the modelling axis
  double prior_weight_;
  double lo_ = 0;  // modelling-axis support
  double hi_ = 0;
  double sigma_ = 1;
};

// l/g model fitted to a state over the unfrozen parameters of a space.
class TpeModel {
 public:
  TpeModel(const TpeState& state, const SearchSpace& space);

  double log_ratio(const Assignment& a) const;
  Assignment sample_good(std::mt19937_64& rng) const;

 private:
  std::vector<ParamDomain> params_;
  std::vector<ParzenEstimator> good_;
  std::vector<ParzenEstimator> bad_;
};

// Aggregated l(x)/g(x) exactly as used by suggest. Throws ValidationError if
// fewer than n_startup observations exist.
double density_ratio(const TpeState& state, const SearchSpace& space, const Assignment& a);

// Proposes the next assignment. `draw_index` selects the random stream, so a
// sequence of suggestions is reproducible from (seed, history, space). While
// the history is shorter than n_startup the draw is uniform and ignores the
// history. Frozen parameters come back at their frozen values. Throws
// ValidationError when every parameter is frozen.
Assignment suggest(const TpeState& state, const SearchSpace& space, std::uint64_t draw_index);

// Uniform draw over the unfrozen parameters (log-uniform for the learning
// rate), frozen parameters filled in.
Assignment sample_uniform(const SearchSpace& space, std::mt19937_64& rng);

}  // namespace pnas
