#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "sig/config.hpp"
#include "sig/points.hpp"

namespace sig::train {

struct EvalRecord {
  std::uint64_t step = 0;
  double wall_time = 0;
  nlohmann::json metrics;  // ModeReport or DiscreteFitReport as JSON
};

nlohmann::json to_json(const EvalRecord& e);
EvalRecord eval_record_from_json(const nlohmann::json& j);

// Everything a finished (or interrupted) run leaves behind. Loss rows live in
// train_log.csv next to run_record.json.
struct RunRecord {
  TrainConfig config;
  std::string config_hash;
  std::uint64_t steps_done = 0;
  bool completed = false;
  double wall_time = 0;
  std::vector<EvalRecord> evals;
  std::filesystem::path directory;

  // Last evaluation, or null before any.
  const nlohmann::json* final_metrics() const;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);
RunRecord load_run_record(const std::filesystem::path& run_dir);

struct RunOptions {
  // Stop (after checkpointing) once this many steps are done; simulates an
  // interruption.
  std::optional<std::uint64_t> stop_after;
  // Continue from <out>/checkpoint when its config hash matches.
  bool resume = true;
  bool write_samples = true;
  bool quiet = true;
};

// Metrics for a set of generated samples under the run's dataset.
nlohmann::json evaluate_samples(const Points& samples, const data::DatasetSpec& spec);

// Trains config.out_dir's run. Writes config.json, train_log.csv
// (step,total,gan_term,sig_term,lambda,wall_time), checkpoint/, samples.csv
// and run_record.json. Evaluates every eval_interval steps and once at the
// final step.
RunRecord run_experiment(const TrainConfig& config, const RunOptions& options = {});

// Seeds seed+0 .. seed+count-1 in <out>/seed_<s>, up to `jobs` at a time.
// Records come back ordered by seed.
std::vector<RunRecord> run_multi_seed(const TrainConfig& base, std::size_t count, std::size_t jobs,
                                      const RunOptions& options = {});

}  // namespace sig::train
