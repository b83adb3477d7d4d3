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
#include "oracles.h"
#include "pnas/costmodel.h"
#include "pnas/error.h"
#include "pnas/io.h"

using namespace pnas;

namespace {

ConvLayerSpec conv(std::int64_t kh, std::int64_t kw, std::int64_t m, std::int64_t sh = 1, std::int64_t sw = 1,
                   Padding p = Padding::kSame) {
  return {kh, kw, m, sh, sw, p};
}

}  // namespace

TEST_CASE("out_shape follows the padding rule") {
  CHECK(out_shape(conv(3, 3, 100), {1, 40, 32}) == TensorShape{100, 40, 32});
  CHECK(out_shape(conv(3, 3, 7, 2, 2), {1, 40, 32}) == TensorShape{7, 20, 16});
  CHECK(out_shape(conv(3, 3, 7, 2, 2), {1, 41, 32}).h == 21);
  CHECK(out_shape(conv(5, 1, 7, 2, 1, Padding::kValid), {1, 40, 32}).h == 18);
}

TEST_CASE("layer_ops examples") {
  CHECK(layer_ops(conv(1, 1, 1), {1, 1, 1}) == 3);
  CHECK(layer_ops(conv(4, 10, 100), {1, 40, 32}) == 10'368'000);
  CHECK(layer_ops(conv(3, 3, 100, 2, 2), {100, 40, 32}) == 60'800'000);
  for (auto [l, in] : {std::pair{conv(4, 10, 100), TensorShape{1, 40, 32}},
                       std::pair{conv(3, 3, 100, 2, 2), TensorShape{100, 40, 32}}}) {
    CHECK(layer_ops(l, in) == oracle::naive_count(l, in).ops);
  }
}

TEST_CASE("layer_params examples") {
  CHECK(layer_params(conv(1, 1, 1), {1, 1, 1}) == 1);
  CHECK(layer_params(conv(4, 10, 100), {1, 40, 32}) == 4000);
  CHECK(layer_params(conv(3, 3, 50), {30, 8, 8}) == 13500);
  CHECK(layer_params(conv(3, 3, 50), {30, 8, 8}) == oracle::naive_count(conv(3, 3, 50), {30, 8, 8}).params);
}

TEST_CASE("1x1 single-channel layer costs 3 per output") {
  for (std::int64_t m : {1, 5, 17}) {
    const TensorShape in{1, 9, 7};
    const auto l = conv(1, 1, m, 2, 3);
    const auto o = out_shape(l, in);
    CHECK(oracle::naive_count(l, in).ops == static_cast<std::uint64_t>(3 * m * o.h * o.w));
    CHECK(layer_ops(l, in) == static_cast<std::uint64_t>(3 * m * o.h * o.w));
  }
}

TEST_CASE("random small layers match the loop counter") {
  std::mt19937_64 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int i = 0; i < 200; ++i) {
    const TensorShape in{pick(1, 8), pick(1, 16), pick(1, 16)};
    const auto pad = pick(0, 1) ? Padding::kSame : Padding::kValid;
    const int kh = pad == Padding::kValid ? pick(1, static_cast<int>(in.h)) : pick(1, 5);
    const int kw = pad == Padding::kValid ? pick(1, static_cast<int>(in.w)) : pick(1, 5);
    const auto l = conv(kh, kw, pick(1, 8), pick(1, 3), pick(1, 3), pad);
    const auto want = oracle::naive_count(l, in);
    CHECK(layer_ops(l, in) == want.ops);
    CHECK(layer_params(l, in) == want.params);
  }
}

TEST_CASE("loop counter guard") {
  CHECK_THROWS_AS(oracle::naive_count(conv(7, 7, 4096), {4096, 64, 64}), std::length_error);
}

TEST_CASE("ceil_div agrees with rational ceiling") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const auto a = std::uniform_int_distribution<std::int64_t>(1, 1'000'000)(rng);
    const auto b = std::uniform_int_distribution<std::int64_t>(1, 1000)(rng);
    const auto want = a / b + (a % b != 0 ? 1 : 0);
    CHECK(ceil_div(a, b) == want);
  }
}

TEST_CASE("monotonicity in M, C, kernel and stride") {
  const TensorShape in{8, 20, 20};
  const auto base = conv(3, 3, 10, 2, 2);
  auto grow = base;
  grow.m += 1;
  CHECK(layer_ops(grow, in) > layer_ops(base, in));
  CHECK(layer_params(grow, in) > layer_params(base, in));
  CHECK(layer_ops(base, {9, 20, 20}) > layer_ops(base, in));
  CHECK(layer_params(base, {9, 20, 20}) > layer_params(base, in));
  grow = base;
  grow.kh += 1;
  CHECK(layer_ops(grow, in) > layer_ops(base, in));
  grow = base;
  grow.kw += 1;
  CHECK(layer_params(grow, in) > layer_params(base, in));
  for (std::int64_t s = 1; s < 6; ++s) {
    auto a = base, b = base;
    a.sh = s;
    b.sh = s + 1;
    CHECK(layer_ops(b, in) <= layer_ops(a, in));
    a = base;
    b = base;
    a.sw = s;
    b.sw = s + 1;
    CHECK(layer_ops(b, in) <= layer_ops(a, in));
  }
}

TEST_CASE("network_cost chains channels and sums layers") {
  NetworkArch one{{1, 5, 5}, {conv(3, 3, 4)}};
  CHECK(network_cost(one).total_ops == layer_ops(conv(3, 3, 4), {1, 5, 5}));

  NetworkArch arch{{1, 40, 32}, {conv(3, 3, 8, 2, 2), conv(1, 1, 16), conv(5, 5, 4)}};
  const auto cost = network_cost(arch);
  REQUIRE(cost.per_layer.size() == 3);
  CHECK(cost.per_layer[1].in_shape.c == 8);
  CHECK(cost.per_layer[2].in_shape.c == 16);
  std::uint64_t ops = 0, params = 0;
  for (const auto& l : cost.per_layer) {
    ops += l.ops;
    params += l.params;
  }
  CHECK(cost.total_ops == ops);
  CHECK(cost.total_params == params);

  NetworkArch swapped = arch;
  std::swap(swapped.layers[1], swapped.layers[2]);
  CHECK(network_cost(swapped).total_ops != cost.total_ops);
}

TEST_CASE("shipped seed and published model ordering") {
  const auto seed = load_arch(PNAS_DATA_DIR "/seed_arch.json");
  const auto ops = network_cost(seed).total_ops;
  CHECK(ops >= 300'000'000);
  CHECK(ops <= 700'000'000);
  CHECK(ops == 613'184'000);
  const auto kws1 = network_cost(load_arch(PNAS_DATA_DIR "/archs/kws1.json")).total_ops;
  const auto kws12 = network_cost(load_arch(PNAS_DATA_DIR "/archs/kws12.json")).total_ops;
  CHECK(kws1 > kws12);
}

TEST_CASE("overflow is reported") {
  CHECK_THROWS_AS(checked_mul(std::uint64_t{1} << 40, std::uint64_t{1} << 40), OverflowError);
  CHECK_THROWS_AS(checked_add(~std::uint64_t{0}, 1), OverflowError);
  const ConvLayerSpec huge{1000, 1000, 1'000'000'000, 1, 1, Padding::kSame};
  CHECK_THROWS_AS(layer_ops(huge, {1'000'000, 1'000'000, 1'000'000}), OverflowError);
}

TEST_CASE("valid padding rejects oversized kernels") {
  NetworkArch arch{{1, 4, 4}, {conv(8, 1, 2, 1, 1, Padding::kValid)}};
  CHECK_THROWS_WITH_AS(network_cost(arch), doctest::Contains("kernel exceeds input"), ValidationError);
}
