#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lambdacore {

// Dense row-major matrix of doubles. Vectors are [1,n] or [n,1].
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}
  static Mat scalar(double v) {
    Mat m(1, 1);
    m.d[0] = v;
    return m;
  }
  static Mat from(std::vector<double> vals, int r, int c) {
    if (static_cast<int>(vals.size()) != r * c) throw std::invalid_argument("Mat::from: size mismatch");
    Mat m;
    m.rows = r;
    m.cols = c;
    m.d = std::move(vals);
    return m;
  }
  static Mat row(const std::vector<double>& vals) { return from(vals, 1, static_cast<int>(vals.size())); }

  double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return d.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const { return "[" + std::to_string(rows) + "," + std::to_string(cols) + "]"; }

  bool all_finite() const {
    for (double v : d)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline std::string shape_pair(const Mat& a, const Mat& b) { return a.shape_str() + " vs " + b.shape_str(); }

}  // namespace lambdacore
