#include "sig/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sig/checkpoint.hpp"
#include "sig/error.hpp"
#include "sig/io.hpp"
#include "sig/metrics.hpp"
#include "sig/trainer.hpp"

namespace sig::train {
namespace fs = std::filesystem;

namespace {

constexpr const char* kLogHeader = "step,total,gan_term,sig_term,lambda,wall_time";

// Keeps the header and the rows of steps already covered by the checkpoint.
void truncate_log(const fs::path& path, std::uint64_t steps_done) {
  std::string kept = std::string(kLogHeader) + "\n";
  if (fs::exists(path)) {
    std::istringstream in(io::read_text(path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoull(line.substr(0, line.find(','))) < steps_done) kept += line + "\n";
    }
  }
  io::write_text(path, kept);
}

void save_checkpoint(const Trainer& trainer, const std::vector<EvalRecord>& evals, double wall_time,
                     const fs::path& dir) {
  model::Checkpoint c = trainer.to_checkpoint();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : evals) history.push_back(to_json(e));
  c.manifest["evals"] = history;
  c.manifest["wall_time"] = wall_time;
  const fs::path staging = dir.string() + ".partial";
  fs::remove_all(staging);
  model::write_checkpoint(staging, c);
  fs::remove_all(dir);
  fs::rename(staging, dir);
}

}  // namespace

nlohmann::json to_json(const EvalRecord& e) {
  return {{"step", e.step}, {"wall_time", e.wall_time}, {"metrics", e.metrics}};
}

EvalRecord eval_record_from_json(const nlohmann::json& j) {
  return {j.at("step").get<std::uint64_t>(), j.at("wall_time").get<double>(), j.at("metrics")};
}

const nlohmann::json* RunRecord::final_metrics() const { return evals.empty() ? nullptr : &evals.back().metrics; }

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json evals = nlohmann::json::array();
  for (const auto& e : r.evals) evals.push_back(to_json(e));
  return {{"config", to_json(r.config)},
          {"config_hash", r.config_hash},
          {"steps_done", r.steps_done},
          {"completed", r.completed},
          {"wall_time", r.wall_time},
          {"evals", evals},
          {"final_metrics", r.evals.empty() ? nlohmann::json() : r.evals.back().metrics}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.config = config_from_json(j.at("config"));
  r.config_hash = j.at("config_hash").get<std::string>();
  r.steps_done = j.at("steps_done").get<std::uint64_t>();
  r.completed = j.at("completed").get<bool>();
  r.wall_time = j.at("wall_time").get<double>();
  for (const auto& e : j.at("evals")) r.evals.push_back(eval_record_from_json(e));
  return r;
}

RunRecord load_run_record(const fs::path& run_dir) {
  const fs::path path = run_dir / "run_record.json";
  try {
    RunRecord r = run_record_from_json(io::read_json(path));
    r.directory = run_dir;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed run record '" + path.string() + "': " + e.what());
  }
}

nlohmann::json evaluate_samples(const Points& samples, const data::DatasetSpec& spec) {
  if (spec.discrete()) return metrics::to_json(metrics::discrete_fit_report(metrics::to_integers(samples), spec));
  return metrics::to_json(metrics::mode_report(samples, spec));
}

RunRecord run_experiment(const TrainConfig& config, const RunOptions& options) {
  validate(config);
  if (config.out_dir.empty()) throw ConfigError("run_experiment: out_dir is empty");
  const fs::path out = config.out_dir;
  const fs::path ckpt_dir = out / "checkpoint";
  const fs::path log_path = out / "train_log.csv";
  io::ensure_directory(out);

  Trainer trainer(config);
  RunRecord record;
  record.config = config;
  record.config_hash = config_hash(config);
  record.directory = out;
  double wall_offset = 0;

  bool resumed = false;
  if (options.resume && model::checkpoint_exists(ckpt_dir)) {
    const model::Checkpoint ckpt = model::read_checkpoint(ckpt_dir);
    if (ckpt.manifest.value("config_hash", std::string()) == record.config_hash) {
      trainer.restore(ckpt);
      for (const auto& e : ckpt.manifest.at("evals")) record.evals.push_back(eval_record_from_json(e));
      wall_offset = ckpt.manifest.at("wall_time").get<double>();
      resumed = true;
    } else if (!options.quiet) {
      std::cerr << "checkpoint in " << ckpt_dir << " belongs to a different config; starting over\n";
    }
  }
  if (!resumed) {
    io::write_json(out / "config.json", to_json(config));
    io::write_text(log_path, std::string(kLogHeader) + "\n");
  } else {
    truncate_log(log_path, trainer.steps_done());
  }

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw IoError("cannot append to '" + log_path.string() + "'");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return wall_offset + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::uint64_t stop = std::min(config.steps, options.stop_after.value_or(config.steps));
  Points last_samples;

  while (trainer.steps_done() < stop) {
    const StepRecord s = trainer.step();
    const std::uint64_t done = trainer.steps_done();
    log << s.step << ',' << io::format_double(s.total) << ',' << io::format_double(s.gan_term) << ','
        << io::format_double(s.sig_term) << ',' << io::format_double(s.lambda) << ',' << io::format_double(elapsed())
        << '\n';

    if (done % config.eval_interval == 0 || done == config.steps) {
      last_samples = trainer.generate(config.eval_samples, done, EvalDraw::automatic);
      record.evals.push_back({done, elapsed(), evaluate_samples(last_samples, config.dataset)});
      if (!options.quiet) std::cerr << "step " << done << ": " << record.evals.back().metrics.dump() << "\n";
    }
    if (done % config.checkpoint_interval == 0 || done == stop) {
      log.flush();
      save_checkpoint(trainer, record.evals, elapsed(), ckpt_dir);
    }
  }
  log.close();
  if (!log) throw IoError("failed writing '" + log_path.string() + "'");

  record.steps_done = trainer.steps_done();
  record.completed = record.steps_done == config.steps;
  record.wall_time = elapsed();
  if (record.completed && options.write_samples) {
    if (last_samples.empty() && config.eval_samples > 0) {
      last_samples = trainer.generate(config.eval_samples, record.steps_done, EvalDraw::automatic);
    }
    io::write_points_csv(out / "samples.csv", last_samples);
  }
  io::write_json(out / "run_record.json", to_json(record));
  return record;
}

std::vector<RunRecord> run_multi_seed(const TrainConfig& base, std::size_t count, std::size_t jobs,
                                      const RunOptions& options) {
  if (count == 0) throw ConfigError("run_multi_seed: seed count must be positive");
  if (base.out_dir.empty()) throw ConfigError("run_multi_seed: out_dir is empty");
  jobs = std::clamp<std::size_t>(jobs, 1, count);

  std::vector<TrainConfig> configs(count, base);
  for (std::size_t i = 0; i < count; ++i) {
    configs[i].seed = base.seed + i;
    configs[i].out_dir = (fs::path(base.out_dir) / ("seed_" + std::to_string(configs[i].seed))).string();
  }

  std::vector<RunRecord> records(count);
  std::vector<std::exception_ptr> failures(count);
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(next_mutex);
        if (next == count) return;
        i = next++;
      }
      try {
        records[i] = run_experiment(configs[i], options);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return records;
}

}  // namespace sig::train
