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

#include "pnas/engine.h"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <future>
#include <random>
#include <sstream>

#include "pnas/error.h"
#include "pnas/hash.h"

namespace pnas {

namespace {

constexpr std::uint64_t kTpeStream = 0x545045;  // "TPE"

Stage parse_stage(const std::string& s) {
  if (s == "search") return Stage::kSearch;
  if (s == "finetune") return Stage::kFinetune;
  throw LogError("unknown stage '" + s + "'");
}

template <typename T>
T require(const Json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end()) throw LogError(std::string("record lacks '") + key + "': " + rec.dump());
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw LogError(std::string("record field '") + key + "' has the wrong type: " + rec.dump());
  }
}

Assignment arch_only(const Assignment& a) {
  Assignment out;
  for (const auto& [id, v] : a) {
    if (is_layer_kind(id.kind)) out.emplace(id, v);
  }
  return out;
}

EvalResponse response_from_record(const Json& rec) {
  const auto event = require<std::string>(rec, "event");
  const auto id = require<std::uint64_t>(rec, "id");
  if (event == "failed") return EvalResponse::failure(id, require<std::string>(rec, "reason"));
  return EvalResponse::success(id, require<double>(rec, "top1"), require<std::int64_t>(rec, "samples"));
}

// Runs the evaluator without letting exceptions escape the worker thread.
EvalResponse safe_evaluate(Evaluator& ev, const EvalRequest& req) {
  try {
    return check_response(req, ev.evaluate(req));
  } catch (const std::exception& e) {
    return EvalResponse::failure(req.trial_id, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void validate_config(const ExperimentConfig& cfg) {
  validate_space(cfg.space);
  if (cfg.phases.empty()) throw ValidationError("config: at least one phase is required");
  for (std::size_t i = 0; i < cfg.phases.size(); ++i) {
    const auto& p = cfg.phases[i];
    if (p.budget < 1) throw ValidationError("config: phase " + std::to_string(i) + " budget must be >= 1");
    validate_solver(p.solver);
    if (cfg.finetune && cfg.finetune_iterations < p.solver.iterations)
      throw ValidationError("config: finetune_iterations must be >= every phase's iterations");
  }
  if (cfg.finetune_iterations < 1) throw ValidationError("config: finetune_iterations must be >= 1");
  if (!(cfg.refine_threshold >= 0 && cfg.refine_threshold <= 1))
    throw ValidationError("config: refine_threshold must lie in [0, 1]");
  if (cfg.max_parallel < 1) throw ValidationError("config: max_parallel must be >= 1");
  if (cfg.evaluator.eval_samples < 1) throw ValidationError("config: eval_samples must be >= 1");
  if (cfg.evaluator.kind != "surrogate" && cfg.evaluator.kind != "worker")
    throw ValidationError("config: evaluator kind must be 'surrogate' or 'worker'");
  if (cfg.evaluator.kind == "worker" && cfg.evaluator.command.empty())
    throw ValidationError("config: worker evaluator needs a command");
  if (!(cfg.cost_weight >= 0)) throw ValidationError("config: cost_weight must be >= 0");
  validate_tpe_config(cfg.tpe);
}

ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("config: expected an object");
  ExperimentConfig cfg;
  try {
    if (j.contains("space")) {
      cfg.space = space_from_json(j.at("space"));
    } else if (j.contains("space_file")) {
      auto p = std::filesystem::path(j.at("space_file").get<std::string>());
      cfg.space = load_space(p.is_absolute() ? p : base_dir / p);
    } else {
      throw ParseError("config: needs 'space_file' or 'space'");
    }
    for (const auto& ph : j.at("phases")) {
      PhaseConfig p;
      p.budget = ph.at("budget").get<std::int64_t>();
      if (ph.contains("solver")) p.solver = solver_from_json(ph.at("solver"));
      if (ph.contains("max_seconds"))
        p.max_time = std::chrono::milliseconds(
            static_cast<std::int64_t>(ph.at("max_seconds").get<double>() * 1000));
      cfg.phases.push_back(p);
    }
    cfg.finetune_iterations = j.value("finetune_iterations", cfg.finetune_iterations);
    cfg.finetune = j.value("finetune", cfg.finetune);
    cfg.refine_threshold = j.value("refine_threshold", cfg.refine_threshold);
    cfg.refine_below_threshold = j.value("refine_below_threshold", cfg.refine_below_threshold);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_parallel = j.value("max_parallel", cfg.max_parallel);
    cfg.carry_history = j.value("carry_history", cfg.carry_history);
    cfg.cost_weight = j.value("cost_weight", cfg.cost_weight);
    if (j.contains("sampler")) {
      const auto s = j.at("sampler").get<std::string>();
      if (s == "tpe") cfg.sampler = SamplerKind::kTpe;
      else if (s == "random") cfg.sampler = SamplerKind::kRandom;
      else throw ParseError("config.sampler: expected 'tpe' or 'random'");
    }
    if (j.contains("tpe")) {
      const auto& t = j.at("tpe");
      cfg.tpe.gamma = t.value("gamma", cfg.tpe.gamma);
      cfg.tpe.n_startup = t.value("n_startup", cfg.tpe.n_startup);
      cfg.tpe.n_candidates = t.value("n_candidates", cfg.tpe.n_candidates);
      cfg.tpe.prior_weight = t.value("prior_weight", cfg.tpe.prior_weight);
    }
    if (j.contains("evaluator")) {
      const auto& e = j.at("evaluator");
      cfg.evaluator.kind = e.value("kind", cfg.evaluator.kind);
      if (e.contains("command")) {
        const auto& c = e.at("command");
        if (c.is_string()) {
          std::istringstream words(c.get<std::string>());
          for (std::string w; words >> w;) cfg.evaluator.command.push_back(w);
        } else {
          cfg.evaluator.command = c.get<std::vector<std::string>>();
        }
      }
      if (e.contains("timeout_s"))
        cfg.evaluator.timeout = std::chrono::milliseconds(
            static_cast<std::int64_t>(e.at("timeout_s").get<double>() * 1000));
      cfg.evaluator.eval_samples = e.value("eval_samples", cfg.evaluator.eval_samples);
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return config_from_json(j, path.parent_path());
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::uint64_t run_hash(const ExperimentConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["space"] = to_json(cfg.space);
  Json phases = Json::array();
  for (const auto& p : cfg.phases) {
    Json pj{{"budget", p.budget}, {"solver", to_json(p.solver)}};
    if (p.max_time) pj["max_ms"] = p.max_time->count();
    phases.push_back(std::move(pj));
  }
  j["phases"] = std::move(phases);
  j["finetune"] = cfg.finetune;
  j["finetune_iterations"] = cfg.finetune_iterations;
  j["refine_threshold"] = cfg.refine_threshold;
  j["refine_below_threshold"] = cfg.refine_below_threshold;
  j["tpe"] = Json{{"gamma", cfg.tpe.gamma},
                  {"n_startup", cfg.tpe.n_startup},
                  {"n_candidates", cfg.tpe.n_candidates},
                  {"prior_weight", cfg.tpe.prior_weight}};
  j["sampler"] = cfg.sampler == SamplerKind::kTpe ? "tpe" : "random";
  j["carry_history"] = cfg.carry_history;
  j["cost_weight"] = cfg.cost_weight;
  j["eval_samples"] = cfg.evaluator.eval_samples;
  return fnv1a(j.dump());
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t stage_seed(std::uint64_t experiment_seed, std::uint64_t trial_id, Stage stage) {
  return combine_seed(experiment_seed, trial_id, static_cast<std::uint64_t>(stage));
}

std::string_view to_string(TrialState s) {
  switch (s) {
    case TrialState::kProposed: return "proposed";
    case TrialState::kEvaluated: return "evaluated";
    case TrialState::kFinetuned: return "finetuned";
    case TrialState::kFailed: return "failed";
  }
  return "?";
}

std::optional<double> Trial::accuracy() const {
  if (finetuned) return finetuned->top1;
  if (search) return search->top1;
  return std::nullopt;
}

std::int64_t Trial::trained_iterations() const {
  if (finetuned) return finetuned->iterations;
  if (search) return search->iterations;
  return 0;
}

// ---------------------------------------------------------------------------
// Log reading

std::vector<Json> read_log_file(const std::filesystem::path& path, std::size_t* torn_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError(path.string() + ": cannot open log");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<Json> records;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      if (torn_bytes) *torn_bytes = text.size() - pos;
      return records;
    }
    ++line_no;
    const auto line = std::string_view(text).substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line.begin(), line.end()));
    } catch (const Json::exception&) {
      throw LogError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
    }
  }
  if (torn_bytes) *torn_bytes = 0;
  return records;
}

LogView replay_records(std::span<const Json> records) {
  LogView view;
  std::optional<std::string> hash;
  for (const auto& rec : records) {
    if (!rec.is_object()) throw LogError("record is not an object");
    const auto event = require<std::string>(rec, "event");
    const auto h = require<std::string>(rec, "seed_hash");
    if (!hash) hash = h;
    if (h != *hash) throw LogError("records from different runs are mixed (seed_hash " + h + ")");

    auto trial_for = [&](const Json& r) -> Trial& {
      const auto id = require<std::uint64_t>(r, "id");
      if (id == 0 || id > view.trials.size())
        throw LogError("result for unknown trial " + std::to_string(id));
      return view.trials[id - 1];
    };

    if (event == "phase") {
      if (require<std::string>(rec, "kind") == "finetune") {
        view.finetune_started = true;
      } else {
        ++view.phases_started;
      }
    } else if (event == "proposed") {
      const auto id = require<std::uint64_t>(rec, "id");
      if (id != view.trials.size() + 1)
        throw LogError("trial id " + std::to_string(id) + " breaks the sequence (expected " +
                       std::to_string(view.trials.size() + 1) + ")");
      Trial t;
      t.id = id;
      t.phase = require<int>(rec, "phase");
      try {
        t.assignment = assignment_from_json(rec.at("assignment"));
      } catch (const std::exception& e) {
        throw LogError(std::string("trial ") + std::to_string(id) + ": " + e.what());
      }
      t.ops = require<std::uint64_t>(rec, "ops");
      t.params = require<std::uint64_t>(rec, "params");
      view.trials.push_back(std::move(t));
    } else if (event == "evaluated") {
      auto& t = trial_for(rec);
      if (t.state != TrialState::kProposed)
        throw LogError("trial " + std::to_string(t.id) + " evaluated twice");
      t.search = EvalOutcome{require<double>(rec, "top1"), require<std::int64_t>(rec, "iterations"),
                             require<std::int64_t>(rec, "samples")};
      t.state = TrialState::kEvaluated;
    } else if (event == "finetuned") {
      auto& t = trial_for(rec);
      if (!t.search) throw LogError("trial " + std::to_string(t.id) + " finetuned before evaluation");
      t.finetuned = EvalOutcome{require<double>(rec, "top1"), require<std::int64_t>(rec, "iterations"),
                                require<std::int64_t>(rec, "samples")};
      t.state = TrialState::kFinetuned;
    } else if (event == "failed") {
      auto& t = trial_for(rec);
      const auto reason = require<std::string>(rec, "reason");
      if (parse_stage(require<std::string>(rec, "stage")) == Stage::kSearch) {
        if (t.state != TrialState::kProposed)
          throw LogError("trial " + std::to_string(t.id) + " evaluated twice");
        t.state = TrialState::kFailed;
        t.failure = reason;
      } else {
        t.finetune_failure = reason;
      }
    } else if (event == "freeze") {
      FreezeEvent ev;
      try {
        ev.id = parse_param_id(require<std::string>(rec, "param"));
      } catch (const ParseError& e) {
        throw LogError(e.what());
      }
      ev.value = require<double>(rec, "value");
      ev.support = rec.value("support", 0.0);
      ev.reason = require<std::string>(rec, "reason");
      view.freezes.push_back(ev);
    } else {
      throw LogError("unknown event '" + event + "'");
    }
  }
  return view;
}

std::vector<const Trial*> frontier_trials(std::span<const Trial> trials, bool search_only) {
  std::vector<const Trial*> with_acc;
  std::vector<ScoredPoint> points;
  for (const auto& t : trials) {
    const auto acc = search_only ? (t.search ? std::optional(t.search->top1) : std::nullopt)
                                 : t.accuracy();
    if (!acc) continue;
    points.push_back({t.id, *acc, t.ops});
    with_acc.push_back(&t);
  }
  std::vector<const Trial*> out;
  for (auto i : frontier_indices(points)) out.push_back(with_acc[i]);
  return out;
}

RefineResult refine(std::span<const Trial> trials, const SearchSpace& space, double threshold,
                    bool freeze_below_threshold) {
  const auto front = frontier_trials(trials, /*search_only=*/true);
  if (front.empty()) throw ValidationError("refine: no evaluated trials on the frontier");
  std::vector<Assignment> assignments;
  for (const auto* t : front) assignments.push_back(arch_only(t->assignment));
  const auto hist = common_settings(assignments);
  std::set<ParamId> exclude;
  for (const auto& d : space.domains) {
    if (d.frozen) exclude.insert(d.id);
  }
  const auto best = most_common_setting(hist, exclude);
  RefineResult r{space, std::nullopt, best.support};
  if (best.support >= threshold || freeze_below_threshold) {
    r.space = freeze_param(space, best.id, best.value);
    r.frozen = best;
  }
  return r;
}

// ---------------------------------------------------------------------------
// TrialLog

TrialLog TrialLog::from_records(std::vector<Json> tape) {
  TrialLog log;
  for (const auto& rec : tape) {
    log.tape_.push_back(rec.dump());
    const auto event = rec.value("event", std::string());
    if (event == "evaluated" || event == "finetuned" || event == "failed") {
      const Stage stage = event == "evaluated" ? Stage::kSearch
                          : event == "finetuned" ? Stage::kFinetune
                                                 : parse_stage(rec.value("stage", std::string()));
      log.tape_results_[{static_cast<int>(stage), rec.value("id", std::uint64_t{0})}] = rec;
    }
  }
  return log;
}

TrialLog TrialLog::open(const std::filesystem::path& path, bool resume) {
  TrialLog log;
  if (resume) {
    std::size_t torn = 0;
    auto records = read_log_file(path, &torn);
    replay_records(records);  // integrity: id sequence, mixed runs
    log = from_records(std::move(records));
    if (torn > 0) {
      std::filesystem::resize_file(path, std::filesystem::file_size(path) - torn);
    }
  } else if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    throw LogError(path.string() + ": log already exists; use resume to continue it");
  }
  log.out_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*log.out_) throw LogError(path.string() + ": cannot open log for writing");
  return log;
}

void TrialLog::append(const Json& record) {
  if (limit_ && lines_.size() >= *limit_) throw Interrupted{};
  auto line = record.dump();
  if (cursor_ < tape_.size()) {
    if (tape_[cursor_] != line) {
      throw LogError("log record " + std::to_string(cursor_ + 1) +
                     " does not match this configuration:\n  log:    " + tape_[cursor_] +
                     "\n  engine: " + line);
    }
    ++cursor_;
  } else if (out_) {
    *out_ << line << '\n';
    out_->flush();
    if (!*out_) throw LogError("failed writing the trial log");
  }
  lines_.push_back(std::move(line));
}

std::optional<Json> TrialLog::tape_result(Stage stage, std::uint64_t id) const {
  auto it = tape_results_.find({static_cast<int>(stage), id});
  if (it == tape_results_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Engine

struct Engine::Pending {
  std::size_t trial_index;
  EvalRequest request;
  std::optional<EvalResponse> ready;
  std::future<EvalResponse> future;

  EvalResponse take() { return ready ? *ready : future.get(); }
};

Engine::Engine(ExperimentConfig cfg, Evaluator& evaluator, TrialLog& log)
    : cfg_(std::move(cfg)), evaluator_(evaluator), log_(log) {
  validate_config(cfg_);
  hash_ = hash_hex(run_hash(cfg_));
  space_ = cfg_.space;
  seed_ops_ = std::max<std::uint64_t>(1, network_cost(space_.seed).total_ops);
  tpe_.config = cfg_.tpe;
}

Json Engine::stamp(Json record) const {
  Json out{{"event", record.at("event")}, {"seed_hash", hash_}};
  for (auto& [k, v] : record.items()) {
    if (k != "event") out[k] = v;
  }
  return out;
}

void Engine::start_tpe(std::size_t phase_index) {
  tpe_.config = cfg_.tpe;
  tpe_.config.rng_seed = combine_seed(cfg_.seed, phase_index, kTpeStream);
  if (!cfg_.carry_history) {
    tpe_.observations.clear();
    return;
  }
  std::erase_if(tpe_.observations, [&](const Observation& o) {
    try {
      check_assignment(space_, o.assignment);
      return false;
    } catch (const ValidationError&) {
      return true;
    }
  });
}

double Engine::objective(const Trial& t, double top1) const {
  if (cfg_.cost_weight <= 0) return top1;
  const double penalty = cfg_.cost_weight * static_cast<double>(t.ops) / static_cast<double>(seed_ops_);
  return std::clamp(top1 - penalty, 0.0, 1.0);
}

bool Engine::history_independent(std::uint64_t draw_index) const {
  if (cfg_.sampler == SamplerKind::kRandom || space_.all_frozen()) return true;
  // A serial run holds at most observed_at_start_ + draw_index results here.
  return observed_at_start_ + draw_index < static_cast<std::size_t>(tpe_.config.n_startup);
}

Assignment Engine::propose(std::uint64_t draw_index) {
  if (space_.all_frozen()) return complete_assignment(space_, {});
  if (cfg_.sampler == SamplerKind::kRandom) {
    std::mt19937_64 rng(combine_seed(tpe_.config.rng_seed, draw_index));
    return sample_uniform(space_, rng);
  }
  return suggest(tpe_, space_, draw_index);
}

void Engine::run_phase(std::size_t phase_index) {
  const auto& phase = cfg_.phases.at(phase_index);
  log_.append(stamp(Json{{"event", "phase"},
                         {"phase", phase_index},
                         {"kind", "search"},
                         {"budget", phase.budget},
                         {"solver", to_json(phase.solver)}}));
  start_tpe(phase_index);
  observed_at_start_ = tpe_.observations.size();
  const auto start = std::chrono::steady_clock::now();
  auto time_up = [&] {
    return phase.max_time && std::chrono::steady_clock::now() - start >= *phase.max_time;
  };

  std::deque<Pending> pending;
  std::int64_t proposed = 0;
  for (;;) {
    const auto draw = static_cast<std::uint64_t>(proposed);
    const bool can_propose =
        proposed < phase.budget && !time_up() &&
        pending.size() < static_cast<std::size_t>(cfg_.max_parallel) &&
        (pending.empty() || history_independent(draw));
    if (can_propose) {
      const auto a = complete_assignment(space_, propose(draw));
      const auto arch = apply_assignment(space_, a);
      const auto cost = network_cost(arch);
      Trial t;
      t.id = next_id_++;
      t.phase = static_cast<int>(phase_index);
      t.assignment = a;
      t.ops = cost.total_ops;
      t.params = cost.total_params;
      trials_.push_back(t);

      Pending p{trials_.size() - 1,
                EvalRequest{t.id, arch, apply_solver(phase.solver, a), cfg_.evaluator.eval_samples,
                            stage_seed(cfg_.seed, t.id, Stage::kSearch)},
                std::nullopt,
                {}};
      if (auto rec = log_.tape_result(Stage::kSearch, t.id)) {
        p.ready = response_from_record(*rec);
      } else if (cfg_.max_parallel == 1) {
        p.ready = safe_evaluate(evaluator_, p.request);
      } else {
        p.future = std::async(std::launch::async, [this, req = p.request] {
          return safe_evaluate(evaluator_, req);
        });
      }
      pending.push_back(std::move(p));
      ++proposed;
      continue;
    }
    if (pending.empty()) break;

    // Results are applied strictly in proposal order.
    auto p = std::move(pending.front());
    pending.pop_front();
    const auto resp = p.take();
    auto& t = trials_[p.trial_index];
    // The proposal is logged with its result so the log does not depend on
    // how many evaluations were in flight.
    log_.append(stamp(Json{{"event", "proposed"},
                           {"id", t.id},
                           {"phase", t.phase},
                           {"assignment", to_json(t.assignment)},
                           {"ops", t.ops},
                           {"params", t.params}}));
    if (resp.ok) {
      t.state = TrialState::kEvaluated;
      t.search = EvalOutcome{resp.top1, p.request.solver.iterations, resp.evaluated_samples};
      log_.append(stamp(Json{{"event", "evaluated"},
                             {"id", t.id},
                             {"top1", resp.top1},
                             {"iterations", t.search->iterations},
                             {"samples", t.search->samples}}));
      tpe_ = observe(std::move(tpe_), space_, Observation{t.assignment, objective(t, resp.top1)});
    } else {
      t.state = TrialState::kFailed;
      t.failure = resp.error;
      log_.append(stamp(Json{{"event", "failed"}, {"id", t.id}, {"stage", "search"}, {"reason", resp.error}}));
    }
  }
}

void Engine::freeze(const FreezeEvent& ev) {
  auto next = freeze_param(space_, ev.id, ev.value);
  Json rec{{"event", "freeze"}, {"param", to_string(ev.id)}, {"value", to_json(Assignment{{ev.id, ev.value}}).begin().value()}};
  if (ev.reason == "refine") rec["support"] = ev.support;
  rec["reason"] = ev.reason;
  log_.append(stamp(std::move(rec)));
  space_ = std::move(next);
  freezes_.push_back(ev);
}

std::optional<FreezeEvent> Engine::refine_step() {
  const auto r = refine(trials_, space_, cfg_.refine_threshold, cfg_.refine_below_threshold);
  if (!r.frozen) return std::nullopt;
  FreezeEvent ev{r.frozen->id, r.frozen->value, r.frozen->support, "refine"};
  freeze(ev);
  return ev;
}

void Engine::pin_solver() {
  std::vector<ParamId> open;
  for (const auto& d : space_.domains) {
    if (!is_layer_kind(d.id.kind) && !d.frozen) open.push_back(d.id);
  }
  if (open.empty()) return;
  const Trial* best = nullptr;
  for (const auto& t : trials_) {
    if (t.search && (!best || t.search->top1 > best->search->top1)) best = &t;
  }
  if (!best) return;
  for (const auto& id : open) freeze(FreezeEvent{id, best->assignment.at(id), 0, "solver"});
}

void Engine::finetune() {
  const auto front = frontier_trials(trials_, /*search_only=*/true);
  std::vector<std::size_t> indices;
  for (const auto* t : front) indices.push_back(static_cast<std::size_t>(t->id - 1));
  log_.append(stamp(Json{{"event", "phase"},
                         {"phase", cfg_.phases.size()},
                         {"kind", "finetune"},
                         {"iterations", cfg_.finetune_iterations},
                         {"candidates", indices.size()}}));

  std::deque<Pending> pending;
  std::size_t next = 0;
  while (next < indices.size() || !pending.empty()) {
    if (next < indices.size() && pending.size() < static_cast<std::size_t>(cfg_.max_parallel)) {
      const auto& t = trials_[indices[next]];
      auto solver = apply_solver(cfg_.phases.at(static_cast<std::size_t>(t.phase)).solver, t.assignment);
      solver.iterations = cfg_.finetune_iterations;
      // The space may have narrowed since this trial was proposed; rebuild
      // the architecture from the seed directly.
      SearchSpace open_space = cfg_.space;
      for (auto& d : open_space.domains) d.frozen.reset();
      Pending p{indices[next],
                EvalRequest{t.id, apply_assignment(open_space, t.assignment), solver,
                            cfg_.evaluator.eval_samples, stage_seed(cfg_.seed, t.id, Stage::kFinetune)},
                std::nullopt,
                {}};
      if (auto rec = log_.tape_result(Stage::kFinetune, t.id)) {
        p.ready = response_from_record(*rec);
      } else if (cfg_.max_parallel == 1) {
        p.ready = safe_evaluate(evaluator_, p.request);
      } else {
        p.future = std::async(std::launch::async, [this, req = p.request] {
          return safe_evaluate(evaluator_, req);
        });
      }
      pending.push_back(std::move(p));
      ++next;
      continue;
    }
    auto p = std::move(pending.front());
    pending.pop_front();
    const auto resp = p.take();
    auto& t = trials_[p.trial_index];
    if (resp.ok) {
      t.finetuned = EvalOutcome{resp.top1, p.request.solver.iterations, resp.evaluated_samples};
      t.state = TrialState::kFinetuned;
      log_.append(stamp(Json{{"event", "finetuned"},
                             {"id", t.id},
                             {"top1", resp.top1},
                             {"iterations", t.finetuned->iterations},
                             {"samples", t.finetuned->samples}}));
    } else {
      t.finetune_failure = resp.error;
      log_.append(stamp(Json{{"event", "failed"}, {"id", t.id}, {"stage", "finetune"}, {"reason", resp.error}}));
    }
  }
}

bool Engine::run() {
  try {
    for (std::size_t p = 0; p < cfg_.phases.size(); ++p) {
      if (p > 0) {
        bool arch_open = false;
        for (const auto& d : space_.domains) arch_open |= is_layer_kind(d.id.kind) && !d.frozen;
        if (arch_open) refine_step();
      }
      run_phase(p);
      if (p == 0) pin_solver();
    }
    if (cfg_.finetune) finetune();
    return true;
  } catch (const Interrupted&) {
    return false;
  }
}

// ---------------------------------------------------------------------------

namespace {

class NullEvaluator final : public Evaluator {
 public:
  EvalResponse evaluate(const EvalRequest& req) override {
    return EvalResponse::failure(req.trial_id, "replay only");
  }
};

LogView view_of(const TrialLog& log) {
  std::vector<Json> records;
  records.reserve(log.lines().size());
  for (const auto& l : log.lines()) records.push_back(Json::parse(l));
  return replay_records(records);
}

void check_same_run(std::span<const Json> records, const ExperimentConfig& cfg) {
  if (records.empty()) return;
  const auto want = hash_hex(run_hash(cfg));
  const auto got = records.front().value("seed_hash", std::string());
  if (got != want)
    throw LogError("log belongs to a different run (seed_hash " + got + ", config gives " + want + ")");
}

}  // namespace

LogView run_experiment(const ExperimentConfig& cfg, Evaluator& evaluator,
                       const std::filesystem::path& log_path) {
  auto log = TrialLog::open(log_path, /*resume=*/false);
  Engine engine(cfg, evaluator, log);
  engine.run();
  return view_of(log);
}

LogView resume_experiment(const ExperimentConfig& cfg, Evaluator& evaluator,
                          const std::filesystem::path& log_path) {
  check_same_run(read_log_file(log_path), cfg);
  auto log = TrialLog::open(log_path, /*resume=*/true);
  Engine engine(cfg, evaluator, log);
  engine.run();
  return view_of(log);
}

ResumeState resume(std::span<const Json> records, const ExperimentConfig& cfg) {
  check_same_run(records, cfg);
  auto log = TrialLog::from_records({records.begin(), records.end()});
  log.set_record_limit(records.size());
  NullEvaluator null;
  Engine engine(cfg, null, log);
  engine.run();
  if (log.replaying()) throw LogError("log extends past the end of this configuration's run");
  // Trials proposed past the end of the log are not part of the state.
  auto view = replay_records(records);
  const auto next_id = view.trials.size() + 1;
  return {engine.space(), engine.tpe_state(), std::move(view.trials), next_id};
}

std::unique_ptr<Evaluator> make_evaluator(const ExperimentConfig& cfg) {
  if (cfg.evaluator.kind == "worker") {
    WorkerOptions opts;
    opts.command = cfg.evaluator.command;
    opts.timeout = cfg.evaluator.timeout;
    return std::make_unique<WorkerEvaluator>(opts, cfg.max_parallel);
  }
  return std::make_unique<SurrogateEvaluator>();
}

}  // namespace pnas
