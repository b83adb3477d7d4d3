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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "pnas/error.h"
#include "pnas/pareto.h"

using namespace pnas;

namespace {

ScoredPoint pt(double acc, std::uint64_t cost, std::uint64_t id = 0) { return {id, acc, cost}; }

std::vector<ScoredPoint> random_points(std::mt19937_64& rng, std::size_t n) {
  std::vector<ScoredPoint> pts;
  std::uniform_int_distribution<int> acc(0, 20), cost(1, 30);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && rng() % 8 == 0) {
      pts.push_back(pts[rng() % pts.size()]);
      pts.back().trial_id = i;
    } else {
      pts.push_back(pt(acc(rng) / 20.0, static_cast<std::uint64_t>(cost(rng)), i));
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("dominates") {
  CHECK(dominates(pt(0.94, 100), pt(0.93, 150)));
  CHECK_FALSE(dominates(pt(0.94, 100), pt(0.94, 100)));
  CHECK_FALSE(dominates(pt(0.9423, 581'120'000), pt(0.9410, 87'610'000)));
  CHECK_FALSE(dominates(pt(0.9410, 87'610'000), pt(0.9423, 581'120'000)));
}

TEST_CASE("frontier examples") {
  CHECK(frontier_indices(std::vector{pt(0.5, 1)}) == std::vector<std::size_t>{0});
  CHECK(frontier_indices(std::vector<ScoredPoint>{}).empty());
  const std::vector four{pt(0.95, 200), pt(0.94, 100), pt(0.93, 50), pt(0.90, 60)};
  CHECK(frontier_indices(four) == std::vector<std::size_t>{0, 1, 2});
  CHECK(frontier_indices(four) == oracle::pareto_pairwise(four));
  const std::vector pairs{pt(0.9423, 581'120'000), pt(0.8960, 17'220'000), pt(0.9410, 87'610'000),
                           pt(0.9425, 167'680'000), pt(0.9511, 223'440'000)};
  // The seed is dominated by the 0.9511 model; the other four are mutually
  // non-dominated.
  CHECK(frontier_indices(pairs) == oracle::pareto_pairwise(pairs));
  CHECK(frontier_indices(std::span(pairs).subspan(1)).size() == 4);
}

TEST_CASE("frontier keeps duplicates") {
  const std::vector pts{pt(0.9, 10, 1), pt(0.9, 10, 2), pt(0.8, 10, 3)};
  CHECK(frontier_indices(pts) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("frontier properties on random sets") {
  std::mt19937_64 rng(99);
  for (int s = 0; s < 200; ++s) {
    const auto pts = random_points(rng, 1 + rng() % 80);
    const auto idx = frontier_indices(pts);
    CHECK(idx == oracle::pareto_pairwise(pts));
    const auto front = frontier(pts);
    CHECK(frontier(front) == front);
    for (const auto& a : front)
      for (const auto& b : front) CHECK_FALSE(dominates(a, b));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::binary_search(idx.begin(), idx.end(), i)) continue;
      CHECK(std::any_of(front.begin(), front.end(), [&](const auto& f) { return dominates(f, pts[i]); }));
    }
    auto rescaled = pts;
    for (auto& p : rescaled) p.cost = p.cost * p.cost * 7 + 3;
    CHECK(frontier_indices(rescaled) == idx);
  }
}

TEST_CASE("dominance is a strict partial order") {
  std::mt19937_64 rng(4);
  const auto pts = random_points(rng, 40);
  for (const auto& a : pts) {
    CHECK_FALSE(dominates(a, a));
    for (const auto& b : pts) {
      CHECK_FALSE((dominates(a, b) && dominates(b, a)));
      for (const auto& c : pts)
        if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));
    }
  }
}

TEST_CASE("common_settings and most_common_setting") {
  const auto kh = ParamId::of_layer(0, ParamKind::kKH);
  const auto kw = ParamId::of_layer(0, ParamKind::kKW);
  const auto m1 = ParamId::of_layer(1, ParamKind::kM);

  std::vector<Assignment> four{{{kh, 3}, {kw, 1}}, {{kh, 3}, {kw, 2}}, {{kh, 3}, {kw, 3}}, {{kh, 1}, {kw, 4}}};
  const auto h = common_settings(four);
  CHECK(h.count(kh, 3) == 3);
  CHECK(h.n == 4);

  std::vector<Assignment> same(5, Assignment{{kh, 2}, {kw, 2}});
  const auto hs = common_settings(same);
  CHECK(hs.count(kh, 2) == 5);
  CHECK(hs.count(kw, 2) == 5);

  std::vector<Assignment> twelve;
  for (int i = 0; i < 12; ++i) twelve.push_back({{kh, i < 9 ? 3.0 : 1.0 + i % 2}, {kw, 1.0 + i % 5}});
  const auto best = most_common_setting(common_settings(twelve));
  CHECK(best.id == kh);
  CHECK(best.value == 3);
  CHECK(best.support == doctest::Approx(0.75));

  std::vector<Assignment> tie{{{kh, 2}, {m1, 5}}, {{kh, 2}, {m1, 5}}};
  CHECK(most_common_setting(common_settings(tie)).id == kh);
  std::vector<Assignment> tie_values{{{kh, 4}}, {{kh, 2}}};
  CHECK(most_common_setting(common_settings(tie_values)).value == 2);

  const auto second = most_common_setting(common_settings(twelve), {kh});
  CHECK(second.id == kw);
  CHECK_THROWS_AS(most_common_setting(common_settings(twelve), {kh, kw}), ValidationError);
  CHECK_THROWS_AS(common_settings(std::vector<Assignment>{}), ValidationError);
  std::vector<Assignment> mixed{{{kh, 1}}, {{kw, 1}}};
  CHECK_THROWS_AS(common_settings(mixed), ValidationError);
}

TEST_CASE("histogram marginals sum to n") {
  std::mt19937_64 rng(2);
  for (int s = 0; s < 50; ++s) {
    std::vector<Assignment> as;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      Assignment a;
      for (int l = 0; l < 3; ++l) a[ParamId::of_layer(l, ParamKind::kM)] = static_cast<double>(rng() % 4);
      as.push_back(a);
    }
    const auto h = common_settings(as);
    for (const auto& [id, values] : h.counts) {
      std::uint64_t total = 0;
      for (const auto& [v, c] : values) total += c;
      CHECK(total == static_cast<std::uint64_t>(n));
    }
  }
}
