#include "sig/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "sig/error.hpp"
#include "sig/io.hpp"

namespace sig::report {
namespace fs = std::filesystem;

namespace {

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<MetricRow> metric_rows(const data::DatasetSpec& spec) {
  if (spec.discrete()) return {{"TV distance", "tv_distance"}, {"KL", "kl"}};
  return {{"Modes", "modes_captured"},
          {"Proportion of high quality samples", "high_quality_proportion"},
          {"KL (26 bins)", "kl_to_data"},
          {"KL (mode bins)", "kl_mode_bins"},
          {"Classifier score", "classifier_score"}};
}

Cell summarize(std::vector<double> values) {
  Cell c;
  c.values = std::move(values);
  if (c.values.empty()) return c;
  const double n = static_cast<double>(c.values.size());
  c.mean = std::accumulate(c.values.begin(), c.values.end(), 0.0) / n;
  if (c.values.size() > 1) {
    double ss = 0;
    for (double v : c.values) ss += (v - c.mean) * (v - c.mean);
    c.stddev = std::sqrt(ss / (n - 1));
  }
  return c;
}

Table build_table(const std::vector<train::RunRecord>& runs) {
  if (runs.empty()) throw ConfigError("report: no runs given");
  const data::DatasetSpec& spec = runs.front().config.dataset;
  Table t;
  t.dataset = data::to_string(spec.kind);
  t.rows = metric_rows(spec);
  std::vector<std::vector<const train::RunRecord*>> groups;
  for (const auto& r : runs) {
    if (!(r.config.dataset == spec)) {
      throw ConfigError("report: run '" + r.directory.string() + "' uses a different dataset spec (" +
                        data::to_json(r.config.dataset).dump() + " vs " + data::to_json(spec).dump() + ")");
    }
    if (!r.final_metrics()) throw ConfigError("report: run '" + r.directory.string() + "' has no evaluation");
    const std::string regime = train::to_string(r.config.regime);
    auto it = std::find(t.columns.begin(), t.columns.end(), regime);
    if (it == t.columns.end()) {
      t.columns.push_back(regime);
      groups.emplace_back();
      it = t.columns.end() - 1;
    }
    groups[static_cast<std::size_t>(it - t.columns.begin())].push_back(&r);
  }
  for (const auto& g : groups) t.run_counts.push_back(g.size());
  for (const auto& row : t.rows) {
    std::vector<Cell> line;
    for (const auto& g : groups) {
      std::vector<double> values;
      for (const auto* r : g) values.push_back(r->final_metrics()->at(row.key).get<double>());
      line.push_back(summarize(std::move(values)));
    }
    t.cells.push_back(std::move(line));
  }
  return t;
}

std::string format_pm(double mean, double stddev) { return two_decimals(mean) + "±" + two_decimals(stddev); }

std::string render_text(const Table& t) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"dataset: " + t.dataset};
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    header.push_back(t.columns[c] + " (n=" + std::to_string(t.run_counts[c]) + ")");
  }
  grid.push_back(header);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> line{t.rows[r].label};
    for (const auto& cell : t.cells[r]) line.push_back(format_pm(cell.mean, cell.stddev));
    grid.push_back(line);
  }
  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    return s.size() - static_cast<std::size_t>(std::count(s.begin(), s.end(), '\xC2'));
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::ostringstream out;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::size_t extra = line[c].size() - width(line[c]);
      out << pad(line[c], widths[c] + extra) << (c + 1 < line.size() ? "  " : "");
    }
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const Table& t) {
  std::ostringstream out;
  out << "metric,regime,mean,std,n\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const Cell& cell = t.cells[r][c];
      out << t.rows[r].key << ',' << t.columns[c] << ',' << io::format_double(cell.mean) << ','
          << io::format_double(cell.stddev) << ',' << cell.values.size() << '\n';
    }
  }
  return out.str();
}

std::vector<train::RunRecord> load_runs(const std::vector<std::string>& dirs) {
  std::vector<train::RunRecord> runs;
  for (const auto& d : dirs) {
    const fs::path dir = d;
    if (fs::exists(dir / "run_record.json")) {
      runs.push_back(train::load_run_record(dir));
      continue;
    }
    std::vector<fs::path> seeds;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0 &&
            fs::exists(entry.path() / "run_record.json")) {
          seeds.push_back(entry.path());
        }
      }
    }
    if (seeds.empty()) throw IoError("no run_record.json in '" + dir.string() + "' or its seed_* directories");
    std::sort(seeds.begin(), seeds.end());
    for (const auto& s : seeds) runs.push_back(train::load_run_record(s));
  }
  return runs;
}

}  // namespace sig::report
