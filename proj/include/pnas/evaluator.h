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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pnas/archspec.h"
#include "pnas/io.h"
#include "pnas/solver.h"

namespace pnas {

struct EvalRequest {
  std::uint64_t trial_id = 0;
  NetworkArch arch;
  SolverSettings solver;
  std::int64_t eval_samples = 100;
  std::uint64_t seed = 0;
};

struct EvalResponse {
  std::uint64_t trial_id = 0;
  double top1 = 0;
  std::int64_t evaluated_samples = 0;
  bool ok = false;
  std::string error;  // set when !ok

  static EvalResponse success(std::uint64_t id, double top1, std::int64_t samples) {
    return {id, top1, samples, true, {}};
  }
  static EvalResponse failure(std::uint64_t id, std::string message) {
    return {id, 0, 0, false, std::move(message)};
  }
};

// Checks a response against its request: matching trial id, top1 in [0, 1],
// at least one sample. Returns the response unchanged or a failure.
EvalResponse check_response(const EvalRequest& req, EvalResponse resp);

// Returns TOP-1 accuracy for a candidate. Implementations must be safe to
// call from several threads at once.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalResponse evaluate(const EvalRequest& req) = 0;
};

// Deterministic stand-in for training: accuracy saturates with the weight
// count and grows with the training budget, plus a small seeded jitter.
struct SurrogateParams {
  double p0 = 20000;              // parameter count at the knee of the curve
  double full_iterations = 40000; // budget at which the budget factor reaches 1
  double noise = 0.01;            // jitter amplitude
};

// cap = 0.5 + 0.45 * (1 - exp(-P / p0)), b = min(1, iters / full)^0.25,
// top1 = clamp(cap * b + eps, 0, 1) quantized to 1 / eval_samples.
EvalResponse surrogate_eval(const EvalRequest& req, const SurrogateParams& params = {});

// Jitter in [-noise, +noise] from a hash of the architecture and seed.
double surrogate_noise(const NetworkArch& arch, std::uint64_t seed, double noise = 0.01);

class SurrogateEvaluator final : public Evaluator {
 public:
  explicit SurrogateEvaluator(SurrogateParams params = {}) : params_(params) {}
  EvalResponse evaluate(const EvalRequest& req) override { return surrogate_eval(req, params_); }

 private:
  SurrogateParams params_;
};

// ---------------------------------------------------------------------------
// Worker wire protocol: one JSON object per line on the worker's stdin/stdout.

inline constexpr int kProtocolVersion = 1;

Json request_to_wire(const EvalRequest& req);
// Parses a response line. Malformed input yields a failure response.
EvalResponse response_from_wire(std::string_view line);

struct WorkerOptions {
  std::vector<std::string> command;  // argv; command[0] looked up in PATH
  std::chrono::milliseconds timeout{std::chrono::hours(1)};
  std::chrono::milliseconds handshake_timeout{std::chrono::seconds(30)};
};

// One worker child process. Spawns and handshakes on construction (throws
// Error on failure); kills and reaps the child on destruction.
class WorkerProcess {
 public:
  explicit WorkerProcess(const WorkerOptions& options);
  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  // Never throws for worker misbehaviour: timeouts, exits and malformed
  // replies come back as failures and leave the process dead.
  EvalResponse evaluate(const EvalRequest& req);

  bool alive() const { return alive_; }
  const std::string& name() const { return name_; }

 private:
  enum class ReadStatus { kLine, kTimeout, kEof };
  ReadStatus read_line(std::string& out, std::chrono::milliseconds timeout);
  bool write_all(const std::string& data);
  void kill_child();

  WorkerOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::string name_;
  bool alive_ = false;
};

// Pool of worker processes, one in-flight request per process. Dead workers
// are replaced on the next request.
class WorkerEvaluator final : public Evaluator {
 public:
  // Starts one worker eagerly so a bad command fails at startup.
  WorkerEvaluator(WorkerOptions options, int max_workers);
  EvalResponse evaluate(const EvalRequest& req) override;

 private:
  std::unique_ptr<WorkerProcess> acquire();
  void release(std::unique_ptr<WorkerProcess> w);

  WorkerOptions options_;
  int max_workers_;
  std::mutex mu_;
  std::vector<std::unique_ptr<WorkerProcess>> idle_;
};

}  // namespace pnas
