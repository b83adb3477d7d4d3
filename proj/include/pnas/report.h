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
#include <string>
#include <vector>

#include "pnas/engine.h"

namespace pnas {

// One row of a seed-relative comparison.
struct DeltaRow {
  std::string label;
  double top1 = 0;
  double ops = 0;
  double speedup = 1;       // seed_ops / ops, rounded to 2 dp
  double delta_points = 0;  // (top1 - seed_top1) * 100, rounded to 2 dp
  bool in_band = false;     // at most `band` points below the seed
};

double round_dp(double v, int dp);
std::string fixed(double v, int dp);

// Throws ValidationError unless both op counts are positive and finite.
DeltaRow compare(double seed_ops, double model_ops, double seed_top1, double model_top1,
                 double band_points = 1.0, std::string label = {});

bool within_band(double seed_top1, double top1, double band_points);

// "0:kh=3;0:kw=3;..." in parameter order.
std::string assignment_string(const Assignment& a);

// Frontier over the log (finetuned results take precedence), sorted by
// descending cost, ties by id.
std::vector<const Trial*> pareto_listing(const LogView& view);

std::string pareto_csv(const LogView& view);
std::string pareto_text(const LogView& view);

// trial_id,ops,top1,phase,is_pareto,is_finetuned for every trial with a result.
std::string scatter_csv(const LogView& view);

std::vector<DeltaRow> delta_table(const LogView& view, double seed_ops, double seed_top1,
                                  double band_points);

std::string delta_csv(const std::vector<DeltaRow>& rows);
std::string delta_text(const std::vector<DeltaRow>& rows);

}  // namespace pnas
