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

#include <random>

#include "doctest.h"
#include "pnas/archspec.h"
#include "pnas/error.h"
#include "pnas/io.h"
#include "pnas/tpe.h"

using namespace pnas;

namespace {

NetworkArch seed_arch() { return load_arch(PNAS_DATA_DIR "/seed_arch.json"); }

ParamId P(int layer, ParamKind k) { return ParamId::of_layer(layer, k); }

Assignment from_layers(const std::vector<std::array<int, 3>>& layers) {
  Assignment a;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    a[P(i, ParamKind::kKH)] = layers[i][0];
    a[P(i, ParamKind::kKW)] = layers[i][1];
    a[P(i, ParamKind::kM)] = layers[i][2];
  }
  return a;
}

}  // namespace

TEST_CASE("validate_arch") {
  CHECK_NOTHROW(validate_arch(seed_arch()));
  CHECK_NOTHROW(validate_arch(NetworkArch{{1, 1, 1}, {ConvLayerSpec{}}}));
  NetworkArch bad{{1, 4, 4}, {ConvLayerSpec{8, 1, 2, 1, 1, Padding::kValid}}};
  CHECK_THROWS_WITH_AS(validate_arch(bad), doctest::Contains("kernel exceeds input"), ValidationError);
  NetworkArch zero{{1, 4, 4}, {ConvLayerSpec{1, 1, 1, 1, 1, Padding::kSame}, ConvLayerSpec{1, 1, 0}}};
  CHECK_THROWS_WITH_AS(validate_arch(zero), doctest::Contains("layer 1"), ValidationError);
  NetworkArch empty{{1, 4, 4}, {}};
  CHECK_THROWS_AS(validate_arch(empty), ValidationError);
}

TEST_CASE("derive_space on the seed") {
  const auto space = derive_space(seed_arch());
  REQUIRE(space.domains.size() == 18);
  auto dom = [&](int l, ParamKind k) { return *space.find(P(l, k)); };
  CHECK(dom(0, ParamKind::kKH).upper == 4);
  CHECK(dom(0, ParamKind::kKW).upper == 10);
  CHECK(dom(0, ParamKind::kM).upper == 100);
  for (int l = 1; l < 6; ++l) {
    CHECK(dom(l, ParamKind::kKH).lower == 1);
    CHECK(dom(l, ParamKind::kKH).upper == 5);
    CHECK(dom(l, ParamKind::kKW).upper == 5);
    CHECK(dom(l, ParamKind::kM).upper == 100);
  }
  // (4*10*100) * (5*5*100)^5
  CHECK(space_size(space) == 4000.0 * 2500.0 * 2500.0 * 2500.0 * 2500.0 * 2500.0);
  CHECK(space_size(space) == doctest::Approx(3.90625e20));
}

TEST_CASE("degenerate single-layer space") {
  const auto space = derive_space(NetworkArch{{1, 1, 1}, {ConvLayerSpec{}}});
  for (const auto& d : space.domains) {
    CHECK(d.lower == 1);
    CHECK(d.upper == 1);
  }
  CHECK(space_size(space) == 1);
}

TEST_CASE("apply_assignment") {
  const auto seed = seed_arch();
  const auto space = derive_space(seed);
  CHECK(apply_assignment(space, extract_assignment(space, seed)) == seed);

  const auto kws1 = apply_assignment(
      space, from_layers({{3, 3, 40}, {3, 3, 30}, {1, 1, 30}, {5, 5, 50}, {5, 5, 50}, {5, 5, 50}}));
  CHECK(kws1 == load_arch(PNAS_DATA_DIR "/archs/kws1.json"));
  for (std::size_t i = 0; i < kws1.layers.size(); ++i) {
    CHECK(kws1.layers[i].sh == seed.layers[i].sh);
    CHECK(kws1.layers[i].sw == seed.layers[i].sw);
    CHECK(kws1.layers[i].padding == seed.layers[i].padding);
  }

  auto frozen = freeze_param(space, P(0, ParamKind::kKH), 3);
  frozen = freeze_param(frozen, P(0, ParamKind::kKW), 3);
  auto a = from_layers({{5, 5, 40}, {3, 3, 30}, {1, 1, 30}, {5, 5, 50}, {5, 5, 50}, {5, 5, 50}});
  CHECK_THROWS_AS(apply_assignment(frozen, a), ValidationError);
  a.erase(P(0, ParamKind::kKH));
  a.erase(P(0, ParamKind::kKW));
  CHECK(apply_assignment(frozen, a).layers[0].kh == 3);

  auto missing = from_layers({{3, 3, 40}});
  CHECK_THROWS_AS(apply_assignment(space, missing), ValidationError);
  auto out = from_layers({{3, 3, 40}, {3, 3, 30}, {1, 1, 30}, {5, 5, 50}, {5, 5, 50}, {6, 5, 50}});
  CHECK_THROWS_AS(apply_assignment(space, out), ValidationError);
}

TEST_CASE("freeze_param") {
  const auto space = derive_space(seed_arch());
  const auto id = P(0, ParamKind::kKH);
  const auto frozen = freeze_param(space, id, 3);
  CHECK(space.find(id)->cardinality() == 4);
  CHECK(*frozen.find(id)->frozen == 3);
  CHECK(space_size(frozen) * 4 == space_size(space));
  CHECK(freeze_param(frozen, id, 3) == frozen);
  CHECK_THROWS_AS(freeze_param(frozen, id, 2), ValidationError);
  CHECK_THROWS_AS(freeze_param(space, id, 9), ValidationError);
  CHECK_THROWS_AS(freeze_param(space, P(9, ParamKind::kKH), 1), ValidationError);
  for (std::size_t i = 0; i < space.domains.size(); ++i) {
    if (space.domains[i].id != id) CHECK(frozen.domains[i] == space.domains[i]);
  }

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) CHECK(sample_uniform(frozen, rng).at(id) == 3);
}

TEST_CASE("freeze property over random spaces") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    NetworkArch seed{{1, 16, 16}, {}};
    const int layers = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int l = 0; l < layers; ++l)
      seed.layers.push_back({std::uniform_int_distribution<int>(1, 5)(rng),
                             std::uniform_int_distribution<int>(1, 5)(rng),
                             std::uniform_int_distribution<int>(1, 40)(rng)});
    const auto space = derive_space(seed);
    const auto& d = space.domains[std::uniform_int_distribution<std::size_t>(0, space.domains.size() - 1)(rng)];
    const auto v = d.value_at(std::uniform_int_distribution<std::uint64_t>(0, d.cardinality() - 1)(rng));
    const auto frozen = freeze_param(space, d.id, v);
    CHECK(space_size(frozen) * static_cast<double>(d.cardinality()) == space_size(space));
    const auto arch = apply_assignment(frozen, sample_uniform(frozen, rng));
    CHECK_NOTHROW(validate_arch(arch));
  }
}

TEST_CASE("param id text form and ordering") {
  CHECK(to_string(P(3, ParamKind::kKH)) == "3:kh");
  CHECK(to_string(ParamId::of_solver(ParamKind::kLR)) == "lr");
  CHECK(parse_param_id("2:m") == P(2, ParamKind::kM));
  CHECK(parse_param_id("batch") == ParamId::of_solver(ParamKind::kBatchSize));
  CHECK_THROWS_AS(parse_param_id("x:kh"), ParseError);
  CHECK(P(0, ParamKind::kM) < P(1, ParamKind::kKH));
  CHECK(P(0, ParamKind::kKH) < P(0, ParamKind::kKW));
  CHECK(P(9, ParamKind::kM) < ParamId::of_solver(ParamKind::kLR));
}

TEST_CASE("solver domains") {
  auto space = derive_space(seed_arch());
  space.domains.push_back({ParamId::of_solver(ParamKind::kLR), 1e-4, 1e-2, 1, std::nullopt});
  space.domains.push_back({ParamId::of_solver(ParamKind::kBatchSize), 10, 100, 5, std::nullopt});
  CHECK_NOTHROW(validate_space(space));
  CHECK(std::isinf(space_size(space)));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = sample_uniform(space, rng);
    const double lr = a.at(ParamId::of_solver(ParamKind::kLR));
    CHECK(lr >= 1e-4);
    CHECK(lr <= 1e-2);
    const double b = a.at(ParamId::of_solver(ParamKind::kBatchSize));
    CHECK(std::fmod(b - 10, 5) == 0);
    const auto s = apply_solver(SolverSettings{}, a);
    CHECK(s.learning_rate == lr);
    CHECK(s.batch_size == static_cast<std::int64_t>(b));
  }
}
