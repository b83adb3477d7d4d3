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
#include <optional>
#include <string>

namespace pnas {

struct LrDecay {
  double factor = 1.0;       // multiplicative drop applied every `every` iterations
  std::int64_t every = 1;

  bool operator==(const LrDecay&) const = default;
};

// Training settings handed to the evaluator for one trial.
struct SolverSettings {
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  std::int64_t batch_size = 25;
  std::int64_t iterations = 8000;
  std::optional<LrDecay> lr_decay;

  bool operator==(const SolverSettings&) const = default;
};

// Throws ValidationError if learning_rate <= 0, batch_size < 1, iterations < 1
// or the decay schedule is malformed.
void validate_solver(const SolverSettings& s);

}  // namespace pnas
