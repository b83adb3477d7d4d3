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

#include "pnas/pareto.h"

#include <algorithm>
#include <numeric>

#include "pnas/error.h"

namespace pnas {

std::vector<std::size_t> frontier_indices(std::span<const ScoredPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
    return points[a].accuracy > points[b].accuracy;
  });

  // Sweep cost groups in increasing order. A point survives iff it has the
  // best accuracy of its group and beats everything strictly cheaper.
  std::vector<std::size_t> keep;
  bool have_best = false;
  double best_cheaper = 0;
  for (std::size_t i = 0; i < order.size();) {
    const auto cost = points[order[i]].cost;
    const double group_max = points[order[i]].accuracy;
    std::size_t j = i;
    while (j < order.size() && points[order[j]].cost == cost) {
      if (points[order[j]].accuracy == group_max && (!have_best || group_max > best_cheaper))
        keep.push_back(order[j]);
      ++j;
    }
    if (!have_best || group_max > best_cheaper) best_cheaper = group_max;
    have_best = true;
    i = j;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::vector<ScoredPoint> frontier(std::span<const ScoredPoint> points) {
  std::vector<ScoredPoint> out;
  for (auto i : frontier_indices(points)) out.push_back(points[i]);
  return out;
}

std::uint64_t SettingHistogram::count(const ParamId& id, double value) const {
  auto it = counts.find(id);
  if (it == counts.end()) return 0;
  auto jt = it->second.find(value);
  return jt == it->second.end() ? 0 : jt->second;
}

SettingHistogram common_settings(std::span<const Assignment> assignments) {
  if (assignments.empty()) throw ValidationError("no assignments to count");
  SettingHistogram h;
  const auto& first = assignments.front();
  for (const auto& a : assignments) {
    const bool same_keys = a.size() == first.size() &&
                           std::equal(a.begin(), a.end(), first.begin(),
                                      [](const auto& x, const auto& y) { return x.first == y.first; });
    if (!same_keys) throw ValidationError("assignments come from different spaces");
    for (const auto& [id, v] : a) ++h.counts[id][v];
    ++h.n;
  }
  return h;
}

CommonSetting most_common_setting(const SettingHistogram& h, const std::set<ParamId>& exclude) {
  std::optional<CommonSetting> best;
  std::uint64_t best_count = 0;
  // Map iteration is already (layer, kind, value) ascending, so the first
  // strict maximum wins every tie.
  for (const auto& [id, values] : h.counts) {
    if (exclude.count(id)) continue;
    for (const auto& [v, c] : values) {
      if (!best || c > best_count) {
        best = CommonSetting{id, v, 0};
        best_count = c;
      }
    }
  }
  if (!best) throw ValidationError("all parameters are frozen");
  best->support = h.n ? static_cast<double>(best_count) / static_cast<double>(h.n) : 0;
  return *best;
}

}  // namespace pnas
