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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pnas/archspec.h"

namespace pnas {

// One candidate in (accuracy up, cost down) objective space.
struct ScoredPoint {
  std::uint64_t trial_id = 0;
  double accuracy = 0;  // TOP-1 fraction in [0, 1]
  std::uint64_t cost = 0;

  bool operator==(const ScoredPoint&) const = default;
};

// a is at least as good on both axes and strictly better on one. Accuracy is
// compared exactly.
constexpr bool dominates(const ScoredPoint& a, const ScoredPoint& b) {
  return a.accuracy >= b.accuracy && a.cost <= b.cost &&
         (a.accuracy > b.accuracy || a.cost < b.cost);
}

// Indices (ascending) of the non-dominated points. Points with identical
// accuracy and cost are kept together. O(n log n).
std::vector<std::size_t> frontier_indices(std::span<const ScoredPoint> points);

// The non-dominated points in input order.
std::vector<ScoredPoint> frontier(std::span<const ScoredPoint> points);

// Count of each (parameter, value) over a set of assignments.
struct SettingHistogram {
  std::map<ParamId, std::map<double, std::uint64_t>> counts;
  std::uint64_t n = 0;  // number of assignments counted

  std::uint64_t count(const ParamId& id, double value) const;
};

// Throws ValidationError on an empty list or assignments over different
// parameter sets.
SettingHistogram common_settings(std::span<const Assignment> assignments);

struct CommonSetting {
  ParamId id;
  double value = 0;
  double support = 0;  // count / n

  bool operator==(const CommonSetting&) const = default;
};

// The (parameter, value) with the highest count among parameters not in
// `exclude`. Ties go to the lower layer, then KH < KW < M, then the smaller
// value. Throws ValidationError if every parameter is excluded.
CommonSetting most_common_setting(const SettingHistogram& h, const std::set<ParamId>& exclude = {});

}  // namespace pnas
