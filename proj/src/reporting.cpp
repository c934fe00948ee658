#include "lambdacore/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lambdacore {
namespace reporting {

using json = nlohmann::json;

std::vector<MetricsRow> parse_metrics_lines(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line);
    MetricsRow row;
    for (auto& [key, value] : j.items()) {
      if (value.is_number()) {
        row[key] = value.get<double>();
      } else if (value.is_boolean()) {
        row[key] = value.get<bool>() ? 1.0 : 0.0;
      } else if (value.is_array() && !value.empty() && value.front().is_number()) {
        row[key] = value.front().get<double>();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> load_metrics_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read metrics file: " + path);
  return parse_metrics_lines(f);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::map<std::string, SeriesBand> aggregate_runs(const std::vector<std::vector<MetricsRow>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  size_t max_len = 0;
  for (const auto& run : runs) max_len = std::max(max_len, run.size());
  if (max_len == 0) throw std::invalid_argument("aggregate_runs: runs are empty");

  std::map<std::string, SeriesBand> out;
  for (size_t t = 0; t < max_len; ++t) {
    std::map<std::string, std::vector<double>> column;
    double step_sum = 0.0;
    int step_count = 0;
    for (const auto& run : runs) {
      if (t >= run.size()) continue;
      for (const auto& [key, value] : run[t]) {
        if (key == "episode") continue;
        if (key == "env_steps") {
          step_sum += value;
          ++step_count;
          continue;
        }
        column[key].push_back(value);
      }
    }
    const long step = step_count > 0 ? std::lround(step_sum / step_count)
                                     : static_cast<long>(t) + 1;
    for (auto& [key, values] : column) {
      SeriesBand& band = out[key];
      band.step.push_back(step);
      band.mean.push_back(std::accumulate(values.begin(), values.end(), 0.0) /
                          static_cast<double>(values.size()));
      band.p5.push_back(percentile(values, 5.0));
      band.p95.push_back(percentile(values, 95.0));
    }
  }
  return out;
}

void write_plot_csv(const std::string& path, const SeriesBand& band) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write CSV: " + path);
  f << "step,mean,p5,p95\n";
  f.precision(17);
  for (size_t i = 0; i < band.mean.size(); ++i)
    f << band.step[i] << "," << band.mean[i] << "," << band.p5[i] << "," << band.p95[i] << "\n";
}

SeriesBand read_plot_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read CSV: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "step,mean,p5,p95")
    throw std::runtime_error("unexpected CSV header in " + path);
  SeriesBand band;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    band.step.push_back(std::stol(cell));
    std::getline(ss, cell, ',');
    band.mean.push_back(std::stod(cell));
    std::getline(ss, cell, ',');
    band.p5.push_back(std::stod(cell));
    std::getline(ss, cell, ',');
    band.p95.push_back(std::stod(cell));
  }
  return band;
}

}  // namespace reporting
}  // namespace lambdacore
