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

#include "pnas/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "pnas/error.h"

namespace pnas {

double round_dp(double v, int dp) {
  const double scale = std::pow(10.0, dp);
  return std::round(v * scale) / scale;
}

std::string fixed(double v, int dp) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", dp, round_dp(v, dp) + 0.0);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

bool within_band(double seed_top1, double top1, double band_points) {
  return (seed_top1 - top1) * 100 <= band_points + 1e-9;
}

DeltaRow compare(double seed_ops, double model_ops, double seed_top1, double model_top1,
                 double band_points, std::string label) {
  if (!(seed_ops > 0) || !(model_ops > 0) || !std::isfinite(seed_ops) || !std::isfinite(model_ops))
    throw ValidationError("operation counts must be positive");
  DeltaRow r;
  r.label = std::move(label);
  r.top1 = model_top1;
  r.ops = model_ops;
  r.speedup = round_dp(seed_ops / model_ops, 2);
  r.delta_points = round_dp((model_top1 - seed_top1) * 100, 2);
  r.in_band = within_band(seed_top1, model_top1, band_points);
  return r;
}

std::string assignment_string(const Assignment& a) {
  std::string out;
  for (const auto& [id, v] : a) {
    if (!out.empty()) out += ';';
    out += to_string(id) + '=';
    if (v == std::floor(v) && std::abs(v) < 1e15) {
      out += std::to_string(static_cast<long long>(v));
    } else {
      std::ostringstream s;
      s << v;
      out += s.str();
    }
  }
  return out;
}

std::vector<const Trial*> pareto_listing(const LogView& view) {
  auto front = frontier_trials(view.trials);
  std::stable_sort(front.begin(), front.end(), [](const Trial* a, const Trial* b) {
    return a->ops > b->ops;
  });
  return front;
}

std::string pareto_csv(const LogView& view) {
  std::string out = "trial_id,top1,ops,mflops,phase,finetuned,assignment\n";
  for (const auto* t : pareto_listing(view)) {
    out += std::to_string(t->id) + ',' + fixed(*t->accuracy(), 4) + ',' + std::to_string(t->ops) + ',' +
           format_mflops(t->ops) + ',' + std::to_string(t->phase) + ',' + (t->finetuned ? "1" : "0") +
           ',' + assignment_string(t->assignment) + '\n';
  }
  return out;
}

std::string pareto_text(const LogView& view) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%6s %7s %10s %5s %9s  %s\n", "trial", "top1", "MFLOPs", "phase",
                "finetuned", "assignment");
  out += buf;
  for (const auto* t : pareto_listing(view)) {
    std::snprintf(buf, sizeof buf, "%6llu %7s %10s %5d %9s  ", static_cast<unsigned long long>(t->id),
                  fixed(*t->accuracy(), 4).c_str(), format_mflops(t->ops).c_str(), t->phase,
                  t->finetuned ? "yes" : "no");
    out += buf + assignment_string(t->assignment) + '\n';
  }
  return out;
}

std::string scatter_csv(const LogView& view) {
  std::set<std::uint64_t> on_front;
  for (const auto* t : frontier_trials(view.trials)) on_front.insert(t->id);
  std::string out = "trial_id,ops,top1,phase,is_pareto,is_finetuned\n";
  for (const auto& t : view.trials) {
    const auto acc = t.accuracy();
    if (!acc) continue;
    out += std::to_string(t.id) + ',' + std::to_string(t.ops) + ',' + fixed(*acc, 4) + ',' +
           std::to_string(t.phase) + ',' + (on_front.count(t.id) ? "1" : "0") + ',' +
           (t.finetuned ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<DeltaRow> delta_table(const LogView& view, double seed_ops, double seed_top1,
                                  double band_points) {
  std::vector<DeltaRow> rows;
  for (const auto* t : pareto_listing(view)) {
    rows.push_back(compare(seed_ops, static_cast<double>(t->ops), seed_top1, *t->accuracy(), band_points,
                           "trial " + std::to_string(t->id)));
  }
  return rows;
}

std::string delta_csv(const std::vector<DeltaRow>& rows) {
  std::string out = "label,top1,mflops,delta_top1,speedup,in_band\n";
  for (const auto& r : rows) {
    out += r.label + ',' + fixed(r.top1, 4) + ',' + fixed(r.ops / 1e6, 2) + ',' + fixed(r.delta_points, 2) +
           ',' + fixed(r.speedup, 2) + ',' + (r.in_band ? "1" : "0") + '\n';
  }
  return out;
}

std::string delta_text(const std::vector<DeltaRow>& rows) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-30s %7s %10s %10s %9s %5s\n", "model", "top1", "MFLOPs", "dTOP-1",
                "speedup", "band");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-30s %7s %10s %10s %8s× %5s\n", r.label.c_str(),
                  fixed(r.top1, 4).c_str(), fixed(r.ops / 1e6, 2).c_str(), fixed(r.delta_points, 2).c_str(),
                  fixed(r.speedup, 2).c_str(), r.in_band ? "*" : "");
    out += buf;
  }
  return out;
}

}  // namespace pnas
