#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace lambdacore {
namespace reporting {

// One logged episode, numeric fields only (vector-valued fields keep their
// first component).
using MetricsRow = std::map<std::string, double>;

std::vector<MetricsRow> parse_metrics_lines(std::istream& in);
std::vector<MetricsRow> load_metrics_file(const std::string& path);

// Per-metric aggregate across runs, aligned on episode index. Runs of
// different lengths aggregate over whichever runs reach each index.
struct SeriesBand {
  std::vector<long> step;  // env_steps mean per episode index (rounded)
  std::vector<double> mean, p5, p95;
};

// Inclusive-interpolation percentile of a sample, q in [0, 100].
double percentile(std::vector<double> values, double q);

std::map<std::string, SeriesBand> aggregate_runs(const std::vector<std::vector<MetricsRow>>& runs);

// CSV with header "step,mean,p5,p95", one row per episode index.
void write_plot_csv(const std::string& path, const SeriesBand& band);
SeriesBand read_plot_csv(const std::string& path);

}  // namespace reporting
}  // namespace lambdacore
