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

#include <cmath>
#include <random>

#include "doctest.h"
#include "pnas/costmodel.h"
#include "pnas/error.h"
#include "pnas/evaluator.h"
#include "pnas/io.h"

using namespace pnas;

namespace {

EvalRequest request(NetworkArch arch, std::int64_t iterations = 40000, std::uint64_t seed = 1) {
  EvalRequest r;
  r.trial_id = 7;
  r.arch = std::move(arch);
  r.solver.iterations = iterations;
  r.seed = seed;
  return r;
}

WorkerOptions stub(const std::string& mode) {
  WorkerOptions o;
  o.command = {STUB_WORKER, mode};
  o.timeout = std::chrono::milliseconds(500);
  o.handshake_timeout = std::chrono::milliseconds(2000);
  return o;
}

NetworkArch tiny() { return NetworkArch{{1, 4, 4}, {ConvLayerSpec{1, 1, 1}}}; }

}  // namespace

TEST_CASE("surrogate formula") {
  // P = 1 at full budget sits at the bottom of the curve.
  const auto r = surrogate_eval(request(tiny()));
  REQUIRE(r.ok);
  CHECK(std::abs(r.top1 - 0.5) <= 0.01 + 0.005 + 1e-12);
  CHECK(r.evaluated_samples == 100);

  NetworkArch big{{64, 8, 8}, {ConvLayerSpec{5, 5, 1000}}};  // 1.6M weights
  const auto rb = surrogate_eval(request(big));
  CHECK(rb.top1 >= 0.94);
  CHECK(rb.top1 <= 0.96);

  // Direct evaluation of the formula.
  const auto arch = load_arch(PNAS_DATA_DIR "/archs/kws5.json");
  const auto req = request(arch, 8000, 99);
  const double p = static_cast<double>(network_cost(arch).total_params);
  const double cap = 0.5 + 0.45 * (1 - std::exp(-p / 20000));
  const double b = std::pow(8000.0 / 40000.0, 0.25);
  const double raw = cap * b + surrogate_noise(arch, 99);
  CHECK(surrogate_eval(req).top1 == std::round(raw * 100) / 100);
}

TEST_CASE("surrogate determinism, bounds and quantization") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    NetworkArch a{{1, 8, 8}, {}};
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int l = 0; l < n; ++l)
      a.layers.push_back({1 + static_cast<std::int64_t>(rng() % 5), 1 + static_cast<std::int64_t>(rng() % 5),
                          1 + static_cast<std::int64_t>(rng() % 200)});
    auto req = request(a, 1 + static_cast<std::int64_t>(rng() % 50000), rng());
    req.eval_samples = 1 + static_cast<std::int64_t>(rng() % 200);
    const auto r1 = surrogate_eval(req);
    const auto r2 = surrogate_eval(req);
    CHECK(r1.top1 == r2.top1);
    CHECK(r1.top1 >= 0);
    CHECK(r1.top1 <= 1);
    const double k = r1.top1 * static_cast<double>(req.eval_samples);
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
  CHECK(std::abs(surrogate_noise(tiny(), 3)) <= 0.01);
}

TEST_CASE("surrogate grows with M on widely separated sizes") {
  NetworkArch small{{1, 8, 8}, {ConvLayerSpec{3, 3, 2}, ConvLayerSpec{3, 3, 2}}};
  NetworkArch large = small;
  large.layers[1].m = 2000;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(surrogate_eval(request(large, 40000, seed)).top1 >
          surrogate_eval(request(small, 40000, seed)).top1 + 0.02);
  }
}

TEST_CASE("response checks") {
  const auto req = request(tiny());
  CHECK(check_response(req, EvalResponse::success(7, 0.5, 100)).ok);
  CHECK_FALSE(check_response(req, EvalResponse::success(8, 0.5, 100)).ok);
  CHECK_FALSE(check_response(req, EvalResponse::success(7, 1.2, 100)).ok);
  CHECK_FALSE(check_response(req, EvalResponse::success(7, -0.1, 100)).ok);
  CHECK_FALSE(check_response(req, EvalResponse::success(7, 0.5, 0)).ok);
}

TEST_CASE("wire format") {
  auto req = request(tiny(), 8000, 42);
  req.solver.lr_decay = LrDecay{0.3, 10000};
  const auto j = request_to_wire(req);
  CHECK(j.dump() ==
        R"({"eval":{"trial_id":7,"arch":{"input":{"c":1,"h":4,"w":4},"layers":[{"kh":1,"kw":1,"m":1,"sh":1,"sw":1,"padding":"same"}]},)"
        R"("solver":{"optimizer":"adam","lr":0.001,"batch":25,"iterations":8000,"decay":{"factor":0.3,"every":10000}},"eval_samples":100,"seed":42}})");
  req.solver.lr_decay.reset();
  CHECK(request_to_wire(req)["eval"]["solver"]["decay"].is_null());

  const auto ok = response_from_wire(R"({"result":{"trial_id":7,"top1":0.25,"evaluated_samples":100}})");
  CHECK(ok.ok);
  CHECK(ok.top1 == 0.25);
  const auto err = response_from_wire(R"({"error":{"trial_id":7,"message":"boom"}})");
  CHECK_FALSE(err.ok);
  CHECK(err.error == "boom");
  CHECK_FALSE(response_from_wire("{").ok);
  CHECK_FALSE(response_from_wire(R"({"result":{"trial_id":7}})").ok);
  CHECK_FALSE(response_from_wire(R"({"other":1})").ok);
}

TEST_CASE("worker: fixed result") {
  WorkerProcess w(stub("fixed"));
  CHECK(w.name() == "stub");
  for (std::uint64_t id = 1; id <= 3; ++id) {
    auto req = request(tiny());
    req.trial_id = id;
    const auto r = w.evaluate(req);
    CHECK(r.ok);
    CHECK(r.top1 == 0.5);
    CHECK(r.trial_id == id);
  }
}

TEST_CASE("worker: invalid replies fail the trial") {
  for (const char* mode : {"too-high", "wrong-id", "garbage"}) {
    CAPTURE(mode);
    WorkerProcess w(stub(mode));
    const auto r = w.evaluate(request(tiny()));
    CHECK_FALSE(r.ok);
    CHECK(r.trial_id == 7);
    CHECK_FALSE(w.alive());
  }
  WorkerProcess w(stub("too-high"));
  CHECK(w.evaluate(request(tiny())).error.find("top1") != std::string::npos);
}

TEST_CASE("worker: reported errors keep the worker") {
  WorkerProcess w(stub("error"));
  const auto r = w.evaluate(request(tiny()));
  CHECK_FALSE(r.ok);
  CHECK(r.error == "cannot train");
  CHECK(w.alive());
}

TEST_CASE("worker: timeouts and exits") {
  {
    WorkerProcess w(stub("hang"));
    const auto start = std::chrono::steady_clock::now();
    const auto r = w.evaluate(request(tiny()));
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("timed out") != std::string::npos);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
    CHECK_FALSE(w.alive());
  }
  {
    WorkerProcess w(stub("die"));
    const auto r = w.evaluate(request(tiny()));
    CHECK_FALSE(r.ok);
    CHECK_FALSE(w.alive());
    CHECK_FALSE(w.evaluate(request(tiny())).ok);
  }
}

TEST_CASE("worker: startup failures") {
  CHECK_THROWS_WITH_AS(WorkerProcess(stub("no-hello")), doctest::Contains("handshake"), Error);
  CHECK_THROWS_WITH_AS(WorkerProcess(stub("old-protocol")), doctest::Contains("protocol"), Error);
  auto slow = stub("silent");
  slow.handshake_timeout = std::chrono::milliseconds(200);
  CHECK_THROWS_WITH_AS(WorkerProcess{slow}, doctest::Contains("handshake"), Error);
  WorkerOptions missing;
  missing.command = {"/nonexistent/worker-binary"};
  CHECK_THROWS_WITH_AS(WorkerProcess{missing}, doctest::Contains("cannot start worker"), Error);
  CHECK_THROWS_AS(WorkerEvaluator(missing, 2), Error);
}

TEST_CASE("worker pool replaces dead workers") {
  WorkerEvaluator pool(stub("die-second"), 2);
  int ok = 0, failed = 0;
  for (std::uint64_t id = 1; id <= 6; ++id) {
    auto req = request(tiny());
    req.trial_id = id;
    (pool.evaluate(req).ok ? ok : failed)++;
  }
  CHECK(failed == 3);
  CHECK(ok == 3);
}
