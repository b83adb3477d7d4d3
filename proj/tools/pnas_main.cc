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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pnas/costmodel.h"
#include "pnas/engine.h"
#include "pnas/error.h"
#include "pnas/io.h"
#include "pnas/report.h"

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_csv(const std::string& format) { return format == "csv"; }

int cmd_cost(const std::string& arch_file, const std::string& format) {
  const auto arch = pnas::load_arch(arch_file);
  const auto cost = pnas::network_cost(arch);
  if (is_csv(format)) {
    std::cout << "layer,kh,kw,m,sh,sw,padding,in_c,in_h,in_w,out_c,out_h,out_w,ops,params\n";
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
      const auto& l = arch.layers[i];
      const auto& c = cost.per_layer[i];
      std::cout << i << ',' << l.kh << ',' << l.kw << ',' << l.m << ',' << l.sh << ',' << l.sw << ','
                << pnas::to_string(l.padding) << ',' << c.in_shape.c << ',' << c.in_shape.h << ','
                << c.in_shape.w << ',' << c.out_shape.c << ',' << c.out_shape.h << ',' << c.out_shape.w
                << ',' << c.ops << ',' << c.params << '\n';
    }
    std::cout << "total,,,,,,,,,,,,," << cost.total_ops << ',' << cost.total_params << '\n';
    return kOk;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%5s %7s %5s %6s %8s %14s %14s %14s %10s\n", "layer", "kernel", "m",
                "stride", "padding", "input", "output", "ops", "params");
  std::cout << buf;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& l = arch.layers[i];
    const auto& c = cost.per_layer[i];
    auto dims = [](const pnas::TensorShape& s) {
      return std::to_string(s.c) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w);
    };
    std::snprintf(buf, sizeof buf, "%5zu %7s %5lld %6s %8s %14s %14s %14llu %10llu\n", i,
                  (std::to_string(l.kh) + "x" + std::to_string(l.kw)).c_str(), static_cast<long long>(l.m),
                  (std::to_string(l.sh) + "x" + std::to_string(l.sw)).c_str(),
                  std::string(pnas::to_string(l.padding)).c_str(), dims(c.in_shape).c_str(),
                  dims(c.out_shape).c_str(), static_cast<unsigned long long>(c.ops),
                  static_cast<unsigned long long>(c.params));
    std::cout << buf;
  }
  std::cout << "total ops    " << cost.total_ops << " (" << pnas::format_mflops(cost.total_ops)
            << " MFLOPs)\n"
            << "total params " << cost.total_params << '\n';
  return kOk;
}

int cmd_compare(double seed_ops, double model_ops, double seed_top1, double model_top1,
                const std::string& format) {
  const auto r = pnas::compare(seed_ops, model_ops, seed_top1, model_top1);
  if (is_csv(format)) {
    std::cout << "speedup,delta_top1\n" << pnas::fixed(r.speedup, 2) << ',' << pnas::fixed(r.delta_points, 2)
              << '\n';
  } else {
    std::cout << "speedup    " << pnas::fixed(r.speedup, 2) << "×\n"
              << "delta_top1 " << pnas::fixed(r.delta_points, 2) << " points\n";
  }
  return kOk;
}

pnas::ExperimentConfig config_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = pnas::load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

void print_summary(const pnas::LogView& view, const std::string& format) {
  std::size_t failed = 0;
  for (const auto& t : view.trials) failed += t.state == pnas::TrialState::kFailed;
  std::cerr << view.trials.size() << " trials (" << failed << " failed), " << view.freezes.size()
            << " freeze events\n";
  for (const auto& f : view.freezes) {
    std::cerr << "froze " << pnas::to_string(f.id) << " = " << f.value << " (" << f.reason;
    if (f.reason == "refine") std::cerr << ", support " << pnas::fixed(f.support, 2);
    std::cerr << ")\n";
  }
  std::cout << (is_csv(format) ? pnas::pareto_csv(view) : pnas::pareto_text(view));
}

int cmd_search(const std::string& config, const std::string& log, const std::optional<std::uint64_t>& seed,
               const std::string& format, bool resume) {
  const auto cfg = config_with_seed(config, seed);
  auto evaluator = pnas::make_evaluator(cfg);
  const auto view = resume ? pnas::resume_experiment(cfg, *evaluator, log)
                           : pnas::run_experiment(cfg, *evaluator, log);
  print_summary(view, format);
  return kOk;
}

pnas::LogView load_view(const std::string& log) {
  std::size_t torn = 0;
  const auto records = pnas::read_log_file(log, &torn);
  if (torn > 0) std::cerr << "warning: ignoring a torn final record (" << torn << " bytes)\n";
  return pnas::replay_records(records);
}

int cmd_pareto(const std::string& log, const std::string& format) {
  const auto view = load_view(log);
  std::cout << (is_csv(format) ? pnas::pareto_csv(view) : pnas::pareto_text(view));
  return kOk;
}

// label,ops,top1 rows; the first data row is the seed.
std::vector<pnas::DeltaRow> points_table(const std::string& path, double band) {
  std::ifstream in(path);
  if (!in) throw pnas::Error(path + ": cannot open");
  std::vector<std::tuple<std::string, double, double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) continue;  // header
    std::istringstream s(line);
    std::string label, ops, top1;
    if (!std::getline(s, label, ',') || !std::getline(s, ops, ',') || !std::getline(s, top1))
      throw pnas::ParseError(path + ":" + std::to_string(line_no) + ": expected label,ops,top1");
    try {
      rows.emplace_back(label, std::stod(ops), std::stod(top1));
    } catch (const std::exception&) {
      throw pnas::ParseError(path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  if (rows.empty()) throw pnas::ParseError(path + ": no seed row");
  const auto& [seed_label, seed_ops, seed_top1] = rows.front();
  std::vector<pnas::DeltaRow> table;
  for (const auto& [label, ops, top1] : rows)
    table.push_back(pnas::compare(seed_ops, ops, seed_top1, top1, band, label));
  return table;
}

struct SeedRef {
  std::optional<std::uint64_t> trial;
  std::optional<double> ops;
  std::optional<double> top1;
};

int cmd_report(const std::string& log, const std::string& points, const SeedRef& seed, double band,
               const std::string& format) {
  if (!points.empty()) {
    const auto table = points_table(points, band);
    std::cout << (is_csv(format) ? pnas::delta_csv(table) : pnas::delta_text(table));
    return kOk;
  }
  if (log.empty()) throw UsageError("report needs --log or --points");
  if (!seed.trial && !(seed.ops && seed.top1))
    throw UsageError("report needs a seed reference: --seed-trial, or --seed-ops with --seed-top1");
  const auto view = load_view(log);
  double seed_ops = 0, seed_top1 = 0;
  if (seed.trial) {
    if (*seed.trial == 0 || *seed.trial > view.trials.size())
      throw pnas::Error("seed trial " + std::to_string(*seed.trial) + " is not in the log");
    const auto& t = view.trials[*seed.trial - 1];
    if (!t.accuracy()) throw pnas::Error("seed trial " + std::to_string(t.id) + " has no result");
    seed_ops = static_cast<double>(t.ops);
    seed_top1 = *t.accuracy();
  } else {
    seed_ops = *seed.ops;
    seed_top1 = *seed.top1;
  }
  std::cout << pnas::scatter_csv(view) << '\n';
  std::vector<pnas::DeltaRow> table{pnas::compare(seed_ops, seed_ops, seed_top1, seed_top1, band, "seed")};
  for (auto& r : pnas::delta_table(view, seed_ops, seed_top1, band)) table.push_back(std::move(r));
  std::cout << (is_csv(format) ? pnas::delta_csv(table) : pnas::delta_text(table));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Performance-oriented neural architecture search"};
  app.require_subcommand(1);

  std::string format = "text";
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}));
  };

  auto* cost = app.add_subcommand("cost", "Operation and weight counts of an architecture file");
  std::string arch_file;
  cost->add_option("arch", arch_file, "Architecture JSON")->required();
  add_format(cost);

  auto* cmp = app.add_subcommand("compare", "Speedup and accuracy change against a seed");
  double seed_ops = 0, model_ops = 0, seed_top1 = 0, model_top1 = 0;
  cmp->add_option("seed_ops", seed_ops)->required();
  cmp->add_option("model_ops", model_ops)->required();
  cmp->add_option("seed_top1", seed_top1)->required();
  cmp->add_option("model_top1", model_top1)->required();
  add_format(cmp);

  std::string config, log;
  std::optional<std::uint64_t> seed;
  auto* search = app.add_subcommand("search", "Run an experiment");
  auto* resume = app.add_subcommand("resume", "Continue an interrupted experiment");
  for (auto* cmd : {search, resume}) {
    cmd->add_option("config", config, "Experiment config JSON")->required();
    cmd->add_option("--log", log, "Trial log path")->required();
    cmd->add_option("--seed", seed, "Override the experiment seed");
    add_format(cmd);
  }

  auto* pareto = app.add_subcommand("pareto", "Frontier of a trial log");
  pareto->add_option("--log", log, "Trial log path")->required();
  add_format(pareto);

  auto* report = app.add_subcommand("report", "Scatter data and seed-relative delta table");
  std::string points;
  SeedRef seed_ref;
  double band = 1.0;
  report->add_option("--log", log, "Trial log path");
  report->add_option("--points", points, "CSV of label,ops,top1; first row is the seed");
  report->add_option("--seed-trial", seed_ref.trial, "Trial id of the seed model");
  report->add_option("--seed-ops", seed_ref.ops, "Seed operation count");
  report->add_option("--seed-top1", seed_ref.top1, "Seed TOP-1 fraction");
  report->add_option("--band", band, "Accuracy band below the seed, in points");
  add_format(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*cost) return cmd_cost(arch_file, format);
    if (*cmp) return cmd_compare(seed_ops, model_ops, seed_top1, model_top1, format);
    if (*search) return cmd_search(config, log, seed, format, false);
    if (*resume) return cmd_search(config, log, seed, format, true);
    if (*pareto) return cmd_pareto(log, format);
    if (*report) return cmd_report(log, points, seed_ref, band, format);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
