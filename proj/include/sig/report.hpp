#pragma once

#include <string>
#include <vector>

#include "sig/experiment.hpp"

namespace sig::report {

struct MetricRow {
  std::string label;  // e.g. "Modes"
  std::string key;    // field in the evaluation JSON
};

// Rows reported for a dataset: mode metrics for continuous data, pmf
// distances for discrete data.
std::vector<MetricRow> metric_rows(const data::DatasetSpec& spec);

struct Cell {
  std::vector<double> values;  // one per run
  double mean = 0;
  double stddev = 0;  // sample standard deviation, 0 for a single run
};

Cell summarize(std::vector<double> values);

// Runs grouped by regime (columns) over metric rows, using each run's final
// evaluation.
struct Table {
  std::string dataset;
  std::vector<std::string> columns;
  std::vector<std::size_t> run_counts;
  std::vector<MetricRow> rows;
  std::vector<std::vector<Cell>> cells;  // [row][column]
};

// Throws ConfigError when the runs disagree on the dataset spec or one has no
// evaluation.
Table build_table(const std::vector<train::RunRecord>& runs);

// "mean±std" with up to two decimals and trailing zeros dropped: 25±0, 0.91±0.04.
std::string format_pm(double mean, double stddev);

std::string render_text(const Table& t);
// label,regime,mean,std,n
std::string render_csv(const Table& t);

// Run directories, expanding a multi-seed directory into its seed_* runs.
std::vector<train::RunRecord> load_runs(const std::vector<std::string>& dirs);

}  // namespace sig::report
