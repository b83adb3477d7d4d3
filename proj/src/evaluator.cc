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

#include "pnas/evaluator.h"

#include <algorithm>
#include <cmath>

#include "pnas/costmodel.h"
#include "pnas/error.h"
#include "pnas/hash.h"

namespace pnas {

EvalResponse check_response(const EvalRequest& req, EvalResponse resp) {
  if (!resp.ok) {
    resp.trial_id = req.trial_id;
    return resp;
  }
  if (resp.trial_id != req.trial_id) {
    return EvalResponse::failure(req.trial_id, "response for trial " + std::to_string(resp.trial_id) +
                                                   " does not match request " +
                                                   std::to_string(req.trial_id));
  }
  if (!(resp.top1 >= 0 && resp.top1 <= 1))
    return EvalResponse::failure(req.trial_id, "top1 outside [0, 1]");
  if (resp.evaluated_samples < 1)
    return EvalResponse::failure(req.trial_id, "evaluated_samples must be >= 1");
  return resp;
}

double surrogate_noise(const NetworkArch& arch, std::uint64_t seed, double noise) {
  std::uint64_t h = fnv1a_u64(seed);
  for (auto v : {arch.input.c, arch.input.h, arch.input.w}) h = fnv1a_u64(static_cast<std::uint64_t>(v), h);
  for (const auto& l : arch.layers) {
    for (auto v : {l.kh, l.kw, l.m, l.sh, l.sw}) h = fnv1a_u64(static_cast<std::uint64_t>(v), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(l.padding), h);
  }
  const double u = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;  // [0, 1)
  return (2 * u - 1) * noise;
}

EvalResponse surrogate_eval(const EvalRequest& req, const SurrogateParams& params) {
  if (req.eval_samples < 1) throw ValidationError("eval_samples must be >= 1");
  const auto cost = network_cost(req.arch);
  const double p = static_cast<double>(cost.total_params);
  const double cap = 0.5 + 0.45 * (1 - std::exp(-p / params.p0));
  const double b =
      std::pow(std::min(1.0, static_cast<double>(req.solver.iterations) / params.full_iterations), 0.25);
  const double raw = std::clamp(cap * b + surrogate_noise(req.arch, req.seed, params.noise), 0.0, 1.0);
  const double n = static_cast<double>(req.eval_samples);
  return EvalResponse::success(req.trial_id, std::round(raw * n) / n, req.eval_samples);
}

Json request_to_wire(const EvalRequest& req) {
  Json eval;
  eval["trial_id"] = req.trial_id;
  eval["arch"] = to_json(req.arch);
  eval["solver"] = to_json(req.solver);
  eval["eval_samples"] = req.eval_samples;
  eval["seed"] = req.seed;
  return Json{{"eval", std::move(eval)}};
}

EvalResponse response_from_wire(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line.begin(), line.end());
  } catch (const Json::exception&) {
    return EvalResponse::failure(0, "malformed response line");
  }
  try {
    if (j.contains("result")) {
      const auto& r = j.at("result");
      if (!r.at("top1").is_number() || !r.at("trial_id").is_number_integer() ||
          !r.at("evaluated_samples").is_number_integer())
        return EvalResponse::failure(0, "malformed result record");
      return EvalResponse::success(r.at("trial_id").get<std::uint64_t>(), r.at("top1").get<double>(),
                                   r.at("evaluated_samples").get<std::int64_t>());
    }
    if (j.contains("error")) {
      const auto& e = j.at("error");
      auto resp = EvalResponse::failure(e.value("trial_id", std::uint64_t{0}),
                                        e.value("message", std::string("worker error")));
      return resp;
    }
  } catch (const Json::exception& e) {
    return EvalResponse::failure(0, std::string("malformed response: ") + e.what());
  }
  return EvalResponse::failure(0, "response has neither 'result' nor 'error'");
}

}  // namespace pnas
