#pragma once
// GridFunction: a real-valued function sampled on a uniform one-dimensional
// grid.  Used for Brownian paths, horizon lines, difference profiles and
// rescaled lattice profiles.  Anchored grids contain the point 0 and the
// stored values satisfy f(0) = 0 by construction of the samplers.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sh {

struct GridFunction {
  double grid_min = 0.0;
  double grid_max = 0.0;
  double step = 1.0;
  // Index of the grid point at coordinate 0 (valid only when `anchored`).
  Eigen::Index zero_index = 0;
  bool anchored = false;
  // Set by windowed operators whose result may be affected by window
  // truncation (a maximizer landed on the window edge).
  bool edge_flag = false;
  Eigen::ArrayXd values;

  Eigen::Index size() const { return values.size(); }

  double x_at(Eigen::Index i) const { return grid_min + step * static_cast<double>(i); }

  Eigen::Index index_near(double x) const {
    auto i = static_cast<Eigen::Index>(std::llround((x - grid_min) / step));
    if (i < 0 || i >= size()) {
      throw std::out_of_range("GridFunction: coordinate " + std::to_string(x) +
                              " outside [" + std::to_string(grid_min) + ", " +
                              std::to_string(grid_max) + "]");
    }
    return i;
  }

  double at(double x) const { return values[index_near(x)]; }

  // f(y) - f(x) with both points snapped to the grid.
  double increment(double x, double y) const { return at(y) - at(x); }

  // Allocates a zero-filled function on the closed grid [min, max] with the
  // given step.  When `anchored` is true, 0 must be a grid point.
  static GridFunction make(double min, double max, double step, bool anchored);
};

inline GridFunction GridFunction::make(double min, double max, double step, bool anchored) {
  if (!(step > 0.0)) throw std::invalid_argument("GridFunction: step must be positive");
  if (!(max > min)) throw std::invalid_argument("GridFunction: empty grid, need max > min");
  auto n = static_cast<Eigen::Index>(std::llround((max - min) / step)) + 1;
  if (n < 2) throw std::invalid_argument("GridFunction: grid needs at least two points");
  GridFunction g;
  g.grid_min = min;
  g.grid_max = min + step * static_cast<double>(n - 1);
  g.step = step;
  g.anchored = anchored;
  g.values = Eigen::ArrayXd::Zero(n);
  if (anchored) {
    auto z = static_cast<Eigen::Index>(std::llround((0.0 - min) / step));
    if (z < 0 || z >= n || std::abs(min + step * static_cast<double>(z)) > 1e-9 * std::max(1.0, step)) {
      throw std::invalid_argument("GridFunction: anchored grid must contain coordinate 0");
    }
    g.zero_index = z;
  }
  return g;
}

}  // namespace sh
