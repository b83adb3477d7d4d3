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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnas/archspec.h"
#include "pnas/costmodel.h"
#include "pnas/evaluator.h"
#include "pnas/io.h"
#include "pnas/pareto.h"
#include "pnas/tpe.h"

namespace pnas {

struct PhaseConfig {
  std::int64_t budget = 1;  // trials proposed, failed ones included
  SolverSettings solver;
  // Optional wall-clock stop; the phase ends at whichever limit hits first.
  std::optional<std::chrono::milliseconds> max_time;
};

struct EvaluatorSpec {
  std::string kind = "surrogate";  // "surrogate" | "worker"
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{std::chrono::hours(1)};
  std::int64_t eval_samples = 100;
};

enum class SamplerKind : std::uint8_t { kTpe, kRandom };

struct ExperimentConfig {
  SearchSpace space;
  std::vector<PhaseConfig> phases;
  std::int64_t finetune_iterations = 40000;
  bool finetune = true;
  double refine_threshold = 0.5;
  // When false, a refinement whose support is below refine_threshold freezes
  // nothing.
  bool refine_below_threshold = true;
  std::uint64_t seed = 0;
  EvaluatorSpec evaluator;
  int max_parallel = 1;
  TpeConfig tpe;  // rng_seed is derived per phase from `seed`
  SamplerKind sampler = SamplerKind::kTpe;
  bool carry_history = false;  // keep compatible observations across phases
  double cost_weight = 0;      // > 0: objective = top1 - w * ops / seed_ops
};

void validate_config(const ExperimentConfig& cfg);

// Reads the experiment document; `space_file` resolves against the
// config's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);

// Identity of a run: seed, space and every setting that shapes the trial
// sequence. Stamped into every log record as "seed_hash".
std::uint64_t run_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

enum class Stage : std::uint8_t { kSearch = 0, kFinetune = 1 };

// Evaluation seed for a (trial, stage) pair.
std::uint64_t stage_seed(std::uint64_t experiment_seed, std::uint64_t trial_id, Stage stage);

enum class TrialState : std::uint8_t { kProposed, kEvaluated, kFinetuned, kFailed };
std::string_view to_string(TrialState s);

struct EvalOutcome {
  double top1 = 0;
  std::int64_t iterations = 0;
  std::int64_t samples = 0;

  bool operator==(const EvalOutcome&) const = default;
};

struct Trial {
  std::uint64_t id = 0;
  int phase = 0;
  Assignment assignment;  // complete, frozen values included
  std::uint64_t ops = 0;
  std::uint64_t params = 0;
  TrialState state = TrialState::kProposed;
  std::optional<EvalOutcome> search;
  std::optional<EvalOutcome> finetuned;
  std::string failure;           // reason of a failed search evaluation
  std::string finetune_failure;  // reason of a failed finetune; trial keeps its search result

  // Finetuned result when present, else the search result.
  std::optional<double> accuracy() const;
  std::int64_t trained_iterations() const;

  bool operator==(const Trial&) const = default;
};

struct FreezeEvent {
  ParamId id;
  double value = 0;
  double support = 0;
  std::string reason;  // "refine" | "solver"

  bool operator==(const FreezeEvent&) const = default;
};

// State rebuilt from log records alone.
struct LogView {
  std::vector<Trial> trials;  // by id
  std::vector<FreezeEvent> freezes;
  int phases_started = 0;
  bool finetune_started = false;
};

// Rebuilds trials and freeze events from records. Throws LogError on id
// gaps, results for unknown trials, mixed seed hashes or unknown events.
LogView replay_records(std::span<const Json> records);

// Reads a line-delimited log file. A final line without a newline is a torn
// write and is ignored; any other unparsable line is a LogError.
std::vector<Json> read_log_file(const std::filesystem::path& path, std::size_t* torn_bytes = nullptr);

// Frontier over trials with an accuracy (finetuned results take precedence).
std::vector<const Trial*> frontier_trials(std::span<const Trial> trials, bool search_only = false);

struct RefineResult {
  SearchSpace space;
  std::optional<CommonSetting> frozen;  // empty when below threshold and not forced
  double support = 0;
};

// Freezes the most common setting among the architecture parameters of the
// frontier over evaluated trials. Throws ValidationError on an empty frontier
// or when every architecture parameter is already frozen.
RefineResult refine(std::span<const Trial> trials, const SearchSpace& space, double threshold,
                    bool freeze_below_threshold = true);

// Append-only record sink. In resume mode, records already on disk form a
// tape: each new record must equal the next tape record, and evaluation
// results are served from the tape instead of re-running the evaluator.
class TrialLog {
 public:
  TrialLog() = default;
  // Appends to `path`. Existing content becomes the tape.
  static TrialLog open(const std::filesystem::path& path, bool resume);
  static TrialLog from_records(std::vector<Json> tape);

  TrialLog(TrialLog&&) = default;
  TrialLog& operator=(TrialLog&&) = default;

  void append(const Json& record);
  std::optional<Json> tape_result(Stage stage, std::uint64_t id) const;
  bool replaying() const { return cursor_ < tape_.size(); }
  std::size_t size() const { return lines_.size(); }
  const std::vector<std::string>& lines() const { return lines_; }

  // Stop after this many records exist (used to simulate interruption).
  void set_record_limit(std::optional<std::size_t> limit) { limit_ = limit; }

 private:
  std::vector<std::string> tape_;
  std::map<std::pair<int, std::uint64_t>, Json> tape_results_;
  std::size_t cursor_ = 0;
  std::vector<std::string> lines_;
  std::unique_ptr<std::ofstream> out_;
  std::optional<std::size_t> limit_;
};

// Thrown by TrialLog::append when the record limit is reached.
struct Interrupted {};

class Engine {
 public:
  Engine(ExperimentConfig cfg, Evaluator& evaluator, TrialLog& log);

  // Each step appends to the log; see run().
  void run_phase(std::size_t phase_index);
  std::optional<FreezeEvent> refine_step();
  void pin_solver();
  void finetune();

  // Full workflow: phase 0, solver pinning, then refine + phase for each
  // further phase, then finetune. Returns false if interrupted.
  bool run();

  const ExperimentConfig& config() const { return cfg_; }
  const SearchSpace& space() const { return space_; }
  const std::vector<Trial>& trials() const { return trials_; }
  const std::vector<FreezeEvent>& freezes() const { return freezes_; }
  const TpeState& tpe_state() const { return tpe_; }
  std::uint64_t next_trial_id() const { return next_id_; }

 private:
  struct Pending;

  Json stamp(Json record) const;
  void start_tpe(std::size_t phase_index);
  double objective(const Trial& t, double top1) const;
  bool history_independent(std::uint64_t draw_index) const;
  Assignment propose(std::uint64_t draw_index);
  void freeze(const FreezeEvent& ev);

  ExperimentConfig cfg_;
  Evaluator& evaluator_;
  TrialLog& log_;
  std::string hash_;
  SearchSpace space_;
  std::uint64_t seed_ops_ = 1;
  std::vector<Trial> trials_;
  std::vector<FreezeEvent> freezes_;
  TpeState tpe_;
  std::size_t observed_at_start_ = 0;
  std::uint64_t next_id_ = 1;
};

// Runs a full experiment, writing the log to `log_path` (must not exist or be
// empty). Returns the final log view.
LogView run_experiment(const ExperimentConfig& cfg, Evaluator& evaluator,
                       const std::filesystem::path& log_path);

// Continues an interrupted run. The existing log must be a prefix of the run
// under `cfg`; the completed log equals an uninterrupted run's.
LogView resume_experiment(const ExperimentConfig& cfg, Evaluator& evaluator,
                          const std::filesystem::path& log_path);

// Engine state at the end of an existing log, without evaluating anything.
struct ResumeState {
  SearchSpace space;
  TpeState tpe;
  std::vector<Trial> trials;
  std::uint64_t next_trial_id = 1;
};
ResumeState resume(std::span<const Json> records, const ExperimentConfig& cfg);

std::unique_ptr<Evaluator> make_evaluator(const ExperimentConfig& cfg);

}  // namespace pnas
