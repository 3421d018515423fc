#pragma once
// Planar last-passage percolation with exponential weights.
//
// Passage values follow the inclusive recursion
//   d(y) = Y(y) + max(d(y - e1), d(y - e2)),
// so both endpoints of a path contribute their weights.  Geodesics are traced
// backward from the target; at an exact tie between the two admissible
// predecessors the step toward the e2-predecessor (the site below) is taken.
//
// Three samplers are provided:
//  * point-to-point tables over a rectangle,
//  * the stationary quadrant (boundary rates rho / 1-rho on the axes,
//    rate-1 bulk) with exit times along both axes,
//  * the half-plane model started from a boundary profile on row 0, with the
//    rightmost maximizing boundary site recorded per target.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sh/rng.hpp"

namespace sh::lattice {

using Site = std::pair<std::int64_t, std::int64_t>;  // (column, row)

// A rectangle of i.i.d. rate-1 exponential weights, addressed by absolute
// lattice coordinates.  Weights are a pure function of (seed, column, row):
// overlapping fields drawn from the same seed agree site by site.
struct WeightField {
  std::uint64_t seed = 0;
  std::int64_t origin_col = 0;
  std::int64_t origin_row = 0;
  Eigen::ArrayXXd weights;  // weights(row - origin_row, col - origin_col)

  std::int64_t width() const { return weights.cols(); }
  std::int64_t height() const { return weights.rows(); }

  bool contains(std::int64_t col, std::int64_t row) const {
    return col >= origin_col && col < origin_col + width() && row >= origin_row &&
           row < origin_row + height();
  }

  double at(std::int64_t col, std::int64_t row) const {
    return weights(static_cast<Eigen::Index>(row - origin_row),
                   static_cast<Eigen::Index>(col - origin_col));
  }
};

WeightField sample_weight_field(std::uint64_t seed, Site origin, std::int64_t width,
                                std::int64_t height);

// Passage values over a rectangle.  Cells outside the reachable cone of the
// source carry an explicit absent mark (NaN); `has` distinguishes them.
struct PassageTable {
  std::int64_t origin_col = 0;
  std::int64_t origin_row = 0;
  Site source{0, 0};
  Eigen::ArrayXXd d;  // d(row - origin_row, col - origin_col); NaN = absent

  std::int64_t width() const { return d.cols(); }
  std::int64_t height() const { return d.rows(); }

  bool contains(std::int64_t col, std::int64_t row) const {
    return col >= origin_col && col < origin_col + width() && row >= origin_row &&
           row < origin_row + height();
  }

  double at(std::int64_t col, std::int64_t row) const {
    return d(static_cast<Eigen::Index>(row - origin_row),
             static_cast<Eigen::Index>(col - origin_col));
  }

  bool has(std::int64_t col, std::int64_t row) const {
    return contains(col, row) && !std::isnan(at(col, row));
  }
};

// Point-to-point passage values from `source` (which must lie in the field)
// to every site of the field weakly above and to the right of it.
PassageTable passage_table(const WeightField& field, Site source);

// Backward-traced geodesic from the table's source to `target`, returned
// source-first.  Predecessor choice needs only the passage values of the two
// candidate predecessors; exact ties step to the e2-predecessor.
struct GeodesicPath {
  std::vector<Site> sites;
  // For boundary-driven tables: (axis, index) of the boundary site where the
  // path leaves the boundary; axis 1 = horizontal, 2 = vertical.
  std::optional<std::pair<int, std::int64_t>> exit_record;
};

GeodesicPath trace_geodesic(const PassageTable& table, Site target);

// Stationary quadrant rooted at `corner`: d(corner) = 0, horizontal boundary
// increments Exp(rate rho), vertical boundary increments Exp(rate 1 - rho),
// bulk weights Exp(1).  Exit times (tau1, tau2) give the number of initial
// horizontal / vertical boundary steps of the geodesic to each site; exactly
// one of the two is nonzero, and on exact ties the horizontal exit wins.
struct StationaryQuadrant {
  double rho = 0.5;
  Site corner{0, 0};
  PassageTable table;
  // Per site: exit axis (1 horizontal, 2 vertical) and exit index >= 1.
  Eigen::Array<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> exit_axis;
  Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> exit_index;

  std::pair<std::int64_t, std::int64_t> exit_times(std::int64_t col, std::int64_t row) const {
    auto r = static_cast<Eigen::Index>(row - table.origin_row);
    auto c = static_cast<Eigen::Index>(col - table.origin_col);
    std::int64_t k = exit_index(r, c);
    return exit_axis(r, c) == 1 ? std::make_pair(k, std::int64_t{0})
                                : std::make_pair(std::int64_t{0}, k);
  }
};

StationaryQuadrant stationary_quadrant(std::uint64_t seed, double rho, Site corner,
                                       std::int64_t width, std::int64_t height);

// Boundary profile h(k) on row 0 of the half-plane model.  Entries can be
// marked absent (e.g. a narrow-wedge profile keeps a single present site).
struct BoundaryProfile {
  std::int64_t k_min = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> present;  // 1 = usable boundary site
  // When the profile is an increment-stationary sample, the rate of its
  // increments; lets consumers extend or diagnose the window.
  std::optional<double> left_rate_hint;
  // Set when the profile was produced by a windowed operation whose maximizer
  // touched the window edge (truncation suspect).
  bool edge_flag = false;

  std::int64_t k_max() const { return k_min + static_cast<std::int64_t>(values.size()) - 1; }
  bool has(std::int64_t k) const {
    return k >= k_min && k <= k_max() && present[static_cast<std::size_t>(k - k_min)];
  }
  double at(std::int64_t k) const { return values[static_cast<std::size_t>(k - k_min)]; }

  // All entries absent except h(k0) = 0.
  static BoundaryProfile narrow_wedge(std::int64_t k0, std::int64_t k_min, std::int64_t k_max);
  // Two-sided random walk with i.i.d. Exp(rate) increments, h(0) = 0.
  static BoundaryProfile stationary(std::uint64_t seed, double rate, std::int64_t k_min,
                                    std::int64_t k_max);
};

// Default boundary half-width for half-plane passage values to targets with
// columns in [0, c] and rows up to n: max(8 * n^{2/3} * log(n+1), 64) to the
// left of 0.
std::int64_t halfplane_left_width(std::int64_t max_row);

// Half-plane passage values d^h(target) = max_k { h(k) + d((k,1), target) }
// computed by the forward recursion
//   psi(m, 1) = w(m,1) + max(h(m), psi(m-1, 1)),
//   psi(m, n) = w(m,n) + max(psi(m-1, n), psi(m, n-1)).
// `exit_k` is the rightmost maximizing boundary site for each target and
// `edge_flag` marks targets whose maximizer sits on the profile's window
// edge (truncation suspect).  The weight field must cover
// [h.k_min, max target col] x [1, max target row].
struct HalfPlaneResult {
  std::vector<double> value;
  std::vector<std::int64_t> exit_k;
  std::vector<std::uint8_t> edge_flag;
};

HalfPlaneResult halfplane_with_boundary(const WeightField& field, const BoundaryProfile& h,
                                        const std::vector<Site>& targets);

}  // namespace sh::lattice
