#include "sig/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "sig/config.hpp"
#include "sig/datasets.hpp"
#include "sig/error.hpp"
#include "sig/experiment.hpp"
#include "sig/io.hpp"
#include "sig/metrics.hpp"
#include "sig/report.hpp"
#include "sig/rng.hpp"
#include "sig/svg_plot.hpp"
#include "sig/theory_checks.hpp"
#include "sig/trainer.hpp"

namespace sig::cli {
namespace fs = std::filesystem;

namespace {

fs::path output_root() {
  const char* env = std::getenv(kOutputRootVariable);
  return env && *env ? fs::path(env) : fs::path("sig-runs");
}

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

// Everything needed to rerun a command: its full argument list plus the
// resolved seed and configuration fingerprint.
void write_manifest(const fs::path& path, const std::string& command, const std::vector<std::string>& args,
                    std::uint64_t seed, const std::string& hash, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json m = {{"command", command}, {"version", version()}, {"seed", seed},
                      {"config_hash", hash}, {"args", args}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  io::write_json(path, m);
}

std::string args_hash(const std::vector<std::string>& args) {
  return hex16(fnv1a(nlohmann::json(args).dump()));
}

train::EvalDraw parse_draw(const std::string& s) { return train::parse_eval_draw(s); }

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

// ---- generate-data ---------------------------------------------------------------

struct GenerateDataOptions {
  std::string kind;
  std::size_t count = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

int generate_data(const GenerateDataOptions& o, const Context& ctx) {
  const data::DatasetSpec spec = data::make_spec(data::parse_dataset_kind(o.kind));
  const fs::path dir = o.out.empty() ? output_root() / ("data-" + o.kind + "-seed" + std::to_string(o.seed)) : fs::path(o.out);
  io::ensure_directory(dir);
  Rng rng = Rng(o.seed).derive("generate-data");
  const Points pts = data::sample_dataset(rng, spec, o.count);
  io::write_points_csv(dir / "data.csv", pts);
  nlohmann::json spec_json = data::to_json(spec);
  spec_json["seed"] = o.seed;
  io::write_json(dir / "spec.json", spec_json);
  write_manifest(dir / "manifest.json", "generate-data", ctx.args, o.seed, args_hash(ctx.args),
                 {{"outputs", {"data.csv", "spec.json"}}});
  ctx.out << "wrote " << pts.size() << " " << o.kind << " samples to " << (dir / "data.csv").string() << "\n";
  return kExitOk;
}

// ---- train ----------------------------------------------------------------------

struct TrainOptions {
  std::string config;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
  std::string regime;
  std::string out;
  std::size_t seeds = 1;
  std::size_t jobs = 1;
  bool no_resume = false;
  bool verbose = false;
};

int train_cmd(const TrainOptions& o, const Context& ctx) {
  train::TrainConfig cfg;
  if (!o.config.empty()) {
    cfg = train::config_from_json(io::read_json(o.config));
    if (!o.dataset.empty()) throw ConfigError("--dataset conflicts with --config; set the dataset in the config file");
  } else {
    const auto kind = data::parse_dataset_kind(o.dataset.empty() ? "gmm-grid" : o.dataset);
    cfg = train::default_config(kind, o.regime.empty() ? train::Regime::sig : train::parse_regime(o.regime));
  }
  if (!o.regime.empty()) cfg.regime = train::parse_regime(o.regime);
  if (o.seed) cfg.seed = *o.seed;
  if (o.steps) cfg.steps = *o.steps;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (cfg.out_dir.empty()) {
    cfg.out_dir = (output_root() / (train::to_string(cfg.regime) + "-" + data::to_string(cfg.dataset.kind) + "-seed" +
                                    std::to_string(cfg.seed)))
                      .string();
  }
  train::validate(cfg);

  train::RunOptions run_opts;
  run_opts.resume = !o.no_resume;
  run_opts.quiet = !o.verbose;
  io::ensure_directory(cfg.out_dir);
  write_manifest(fs::path(cfg.out_dir) / "manifest.json", "train", ctx.args, cfg.seed, train::config_hash(cfg),
                 {{"config", train::to_json(cfg)}, {"seeds", o.seeds}});

  std::vector<train::RunRecord> runs;
  if (o.seeds <= 1) {
    runs.push_back(train::run_experiment(cfg, run_opts));
  } else {
    runs = train::run_multi_seed(cfg, o.seeds, o.jobs, run_opts);
  }
  for (const auto& r : runs) {
    ctx.out << r.directory.string() << ": " << r.steps_done << " steps, " << io::format_double(r.wall_time) << " s\n";
  }
  const report::Table table = report::build_table(runs);
  const std::string text = report::render_text(table);
  ctx.out << text;
  if (runs.size() > 1) {
    io::write_text(fs::path(cfg.out_dir) / "summary.txt", text);
    io::write_text(fs::path(cfg.out_dir) / "summary.csv", report::render_csv(table));
  }
  return kExitOk;
}

// ---- sample ---------------------------------------------------------------------

struct SampleOptions {
  std::string checkpoint;
  std::size_t count = metrics::kReferenceSampleCount;
  std::uint64_t seed = 0;
  std::string draw = "auto";
  std::string out;
};

int sample_cmd(const SampleOptions& o, const Context& ctx) {
  train::LoadedGenerator loaded = train::load_generator(o.checkpoint);
  const fs::path out = o.out.empty() ? output_root() / "samples.csv" : fs::path(o.out);
  if (out.has_parent_path()) io::ensure_directory(out.parent_path());
  const Points pts = train::sample_generator(loaded.generator, loaded.config, o.count,
                                             Rng(o.seed).derive("sample-command"), parse_draw(o.draw));
  io::write_points_csv(out, pts);
  write_manifest(out.string() + ".manifest.json", "sample", ctx.args, o.seed, train::config_hash(loaded.config),
                 {{"checkpoint_step", loaded.step}});
  ctx.out << "wrote " << pts.size() << " samples to " << out.string() << "\n";
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------------

struct EvalOptions {
  std::string samples;
  std::string spec;
  std::string out;
};

int eval_cmd(const EvalOptions& o, const Context& ctx) {
  const Points pts = io::read_points_csv(o.samples);
  const data::DatasetSpec spec = data::spec_from_json(io::read_json(o.spec));
  const nlohmann::json metrics = train::evaluate_samples(pts, spec);
  ctx.out << metrics.dump(2) << "\n";
  for (const auto& row : report::metric_rows(spec)) {
    ctx.out << row.label << ": " << io::format_double(metrics.at(row.key).get<double>()) << "\n";
  }
  const fs::path dir = o.out.empty() ? output_root() / "eval" : fs::path(o.out);
  io::ensure_directory(dir);
  io::write_json(dir / "report.json", metrics);
  write_manifest(dir / "manifest.json", "eval", ctx.args, 0, args_hash(ctx.args));
  return kExitOk;
}

// ---- theory ---------------------------------------------------------------------

struct TheoryOptions {
  std::string check = "all";
  std::uint64_t seed = 0;
  std::string out;
};

int theory_cmd(const TheoryOptions& o, const Context& ctx) {
  const auto results = theory::run_theory_checks(o.check, o.seed);
  nlohmann::json j = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : results) {
    j.push_back(theory::to_json(r));
    ok = ok && r.passed;
  }
  ctx.out << j.dump(2) << "\n";
  const fs::path dir = o.out.empty() ? output_root() / "theory" : fs::path(o.out);
  io::ensure_directory(dir);
  io::write_json(dir / "theory.json", j);
  write_manifest(dir / "manifest.json", "theory", ctx.args, o.seed, args_hash(ctx.args));
  return ok ? kExitOk : kExitNumerical;
}

// ---- plot -----------------------------------------------------------------------

struct PlotOptions {
  std::string samples;
  std::string spec;
  std::string out;
  std::size_t max_points = plot::PlotOptions{}.max_points;
};

int plot_cmd(const PlotOptions& o, const Context& ctx) {
  const Points pts = io::read_points_csv(o.samples);
  const data::DatasetSpec spec = data::spec_from_json(io::read_json(o.spec));
  plot::PlotOptions opts;
  opts.max_points = o.max_points;
  const std::string svg = plot::render_svg(pts, spec, opts);
  const fs::path out = o.out.empty() ? output_root() / "plot.svg" : fs::path(o.out);
  if (out.has_parent_path()) io::ensure_directory(out.parent_path());
  io::write_text(out, svg);
  write_manifest(out.string() + ".manifest.json", "plot", ctx.args, 0, args_hash(ctx.args));
  ctx.out << "wrote " << out.string() << "\n";
  return kExitOk;
}

// ---- report ---------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> runs;
  std::string out;
};

int report_cmd(const ReportOptions& o, const Context& ctx) {
  const auto runs = report::load_runs(o.runs);
  const report::Table table = report::build_table(runs);
  const std::string text = report::render_text(table);
  ctx.out << text;
  const fs::path dir = o.out.empty() ? output_root() / "report" : fs::path(o.out);
  io::ensure_directory(dir);
  io::write_text(dir / "summary.txt", text);
  io::write_text(dir / "summary.csv", report::render_csv(table));
  write_manifest(dir / "manifest.json", "report", ctx.args, 0, args_hash(ctx.args));
  return kExitOk;
}

}  // namespace

std::string version() { return SIG_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-implicit generator training and evaluation", "sig"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  const Context ctx{args, out, err};

  GenerateDataOptions gd;
  auto* gd_cmd = app.add_subcommand("generate-data", "Draw a synthetic dataset");
  gd_cmd->add_option("--kind", gd.kind, "negbin | pois-negbin-mix | ring-noise | gmm-grid | gmm-ring")->required();
  gd_cmd->add_option("--count", gd.count, "Number of draws")->capture_default_str();
  gd_cmd->add_option("--seed", gd.seed, "Random seed")->capture_default_str();
  gd_cmd->add_option("--out", gd.out, "Output directory");

  TrainOptions tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a generator");
  tr_cmd->add_option("--config", tr.config, "JSON config file");
  tr_cmd->add_option("--dataset", tr.dataset, "Dataset kind when no config is given");
  tr_cmd->add_option("--seed", tr.seed, "Override the config seed");
  tr_cmd->add_option("--steps", tr.steps, "Override the step count");
  tr_cmd->add_option("--regime", tr.regime, "sig | gan | gan-si");
  tr_cmd->add_option("--out", tr.out, "Run directory");
  tr_cmd->add_option("--seeds", tr.seeds, "Independent seeds seed+0..seed+n-1")->capture_default_str();
  tr_cmd->add_option("--jobs", tr.jobs, "Seeds trained concurrently")->capture_default_str();
  tr_cmd->add_flag("--no-resume", tr.no_resume, "Ignore an existing checkpoint");
  tr_cmd->add_flag("--verbose", tr.verbose, "Print evaluations as they happen");

  SampleOptions sa;
  auto* sa_cmd = app.add_subcommand("sample", "Draw samples from a checkpoint");
  sa_cmd->add_option("--checkpoint", sa.checkpoint, "Checkpoint directory")->required();
  sa_cmd->add_option("--count", sa.count, "Number of samples")->capture_default_str();
  sa_cmd->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  sa_cmd->add_option("--draw", sa.draw, "auto | theta | x")->capture_default_str();
  sa_cmd->add_option("--out", sa.out, "Output CSV");

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score samples against a dataset spec");
  ev_cmd->add_option("--samples", ev.samples, "Sample CSV")->required();
  ev_cmd->add_option("--spec", ev.spec, "Dataset spec JSON")->required();
  ev_cmd->add_option("--out", ev.out, "Directory for report.json");

  TheoryOptions th;
  auto* th_cmd = app.add_subcommand("theory", "Run the theory checks");
  th_cmd->add_option("--check", th.check, "ordering | assignment | ratio | all")->capture_default_str();
  th_cmd->add_option("--seed", th.seed, "Random seed")->capture_default_str();
  th_cmd->add_option("--out", th.out, "Directory for theory.json");

  PlotOptions pl;
  auto* pl_cmd = app.add_subcommand("plot", "Render samples as SVG");
  pl_cmd->add_option("--samples", pl.samples, "Sample CSV")->required();
  pl_cmd->add_option("--spec", pl.spec, "Dataset spec JSON")->required();
  pl_cmd->add_option("--out", pl.out, "Output SVG");
  pl_cmd->add_option("--max-points", pl.max_points, "Leading samples drawn, 0 for all")->capture_default_str();

  ReportOptions rp;
  auto* rp_cmd = app.add_subcommand("report", "Aggregate run records into a table");
  rp_cmd->add_option("runs", rp.runs, "Run directories")->required();
  rp_cmd->add_option("--out", rp.out, "Directory for summary.txt and summary.csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gd_cmd) return generate_data(gd, ctx);
    if (*tr_cmd) return train_cmd(tr, ctx);
    if (*sa_cmd) return sample_cmd(sa, ctx);
    if (*ev_cmd) return eval_cmd(ev, ctx);
    if (*th_cmd) return theory_cmd(th, ctx);
    if (*pl_cmd) return plot_cmd(pl, ctx);
    if (*rp_cmd) return report_cmd(rp, ctx);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sig::cli
