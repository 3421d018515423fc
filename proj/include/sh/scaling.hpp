#pragma once
// Scaling bridge between the exponential corner-growth lattice and the
// continuum objects: characteristic directions, Busemann-function estimators,
// the rescaled passage-time landscape, rescaled Busemann lines, and
// profile-driven growth steps / geodesics.
//
// Conventions
//   * Size parameter N sets the frame: one unit of scaled space is
//     2^{5/3} N^{2/3} lattice columns, one unit of scaled time is N lattice
//     rows, values are centred and divided by 2^{4/3} N^{1/3}.
//   * A density rho in (0,1) corresponds to the lattice direction
//     u(rho) = (rho^2, (1-rho)^2) / (rho^2 + (1-rho)^2).
//   * Scaled direction xi maps to density rho = 1/2 - 2^{-4/3} xi N^{-1/3}.

#include <sh/grid_function.hpp>
#include <sh/lattice.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace sh::scaling {

// ---------------------------------------------------------------------------
// Frame arithmetic
// ---------------------------------------------------------------------------

struct ScalingFrame {
  std::int64_t N = 1;

  double space_unit() const;   // lattice columns per unit of scaled space
  double height_unit() const;  // lattice rows per unit of scaled time
  double value_scale() const;  // divisor applied to centred passage values

  // Centring term for the passage time from (x, s) to (y, t) in scaled
  // coordinates: 4 N (t - s) + 2^{8/3} N^{2/3} (y - x).
  double value_center(double x, double s, double y, double t) const;

  // Nearest lattice site for a scaled space-time point (x, s):
  // row = round(s * N), col = round(s * N + space_unit * x).
  lattice::Site site_of(double x, double s) const;
};

// Characteristic lattice direction for density rho (components sum to one).
// Throws std::invalid_argument unless 0 < rho < 1.
std::pair<double, double> direction_vector(double rho);

// ---------------------------------------------------------------------------
// Busemann estimator
// ---------------------------------------------------------------------------

// Difference of passage times from a far corner, evaluated on a schedule of
// corner distances.  For each n in the schedule the corner is
// (-floor(n * u1), -floor(n * u2)) with u = direction_vector(rho), and the
// estimate for a point pair (p, q) is d(corner, q) - d(corner, p).  The
// weight field is site-keyed, so successive schedule entries re-use the
// same weights on overlapping regions; "stabilized" means the last two
// schedule entries agree within 1e-9 on every pair.
struct BusemannEstimate {
  double rho = 0.5;
  std::vector<std::pair<lattice::Site, lattice::Site>> pairs;
  // One row per schedule entry, one column per pair.
  std::vector<std::vector<double>> history;
  // Values at the final schedule entry (== history.back()).
  std::vector<double> values;
  std::int64_t n_used = 0;
  bool stabilized = false;
};

BusemannEstimate busemann_estimate(
    double rho,
    const std::vector<std::pair<lattice::Site, lattice::Site>>& point_pairs,
    const std::vector<std::int64_t>& n_schedule, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rescaled landscape
// ---------------------------------------------------------------------------

struct LandscapeQuery {
  double x = 0.0;  // scaled space of the source
  double s = 0.0;  // scaled time of the source
  double y = 0.0;  // scaled space of the target
  double t = 1.0;  // scaled time of the target
};

// Rescaled point-to-point passage value
//   (d(site_of(x,s), site_of(y,t)) - value_center(x,s,y,t)) / value_scale
// for each query, all on one site-keyed weight realization.  Requires each
// query to advance at least one lattice row; throws std::invalid_argument
// otherwise and std::length_error when a query rectangle is too large.
std::vector<double> scaled_landscape(std::int64_t N,
                                     const std::vector<LandscapeQuery>& queries,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rescaled Busemann lines
// ---------------------------------------------------------------------------

struct ScaledLineSample {
  std::int64_t N = 1;
  std::vector<double> directions;   // the scaled directions xi, ascending
  std::vector<double> densities;    // matching lattice densities, descending
  std::vector<GridFunction> lines;  // one centred line per direction
  std::uint64_t seed = 0;
};

// Cumulative horizontal Busemann increments for each direction, sampled with
// the coupled multiclass construction, centred by subtracting twice the
// column index and divided by 2^{4/3} N^{1/3}.  The grid step is one lattice
// column (1 / space_unit) and x = 0 sits on the grid.  With two directions
// the pair is initialized from its exact stationary backlog, so the joint
// law needs no relaxation margin; otherwise `left_pad_sites` extra columns
// are simulated to the left of the window and discarded.
ScaledLineSample scaled_busemann_line(std::int64_t N,
                                      const std::vector<double>& xi_list,
                                      double x_lo, double x_hi,
                                      std::uint64_t seed,
                                      std::int64_t left_pad_sites = 0);

// Difference of adjacent scaled lines, i one-based with i >= 2:
// lines[i-1] - lines[i-2].  Nondecreasing up to float tolerance.
GridFunction diff_profile(const ScaledLineSample& sample, std::size_t i);

// ---------------------------------------------------------------------------
// Profile-driven growth and geodesics
// ---------------------------------------------------------------------------

// Evolve a boundary profile `levels` rows upward with the half-plane
// recursion, recentred at column zero: output(m) = psi(m, levels) -
// psi(0, levels).  levels == 0 returns the input profile recentred at 0.
// The output carries the input's left_rate_hint and sets edge_flag when any
// evaluated column's maximizer touched the profile window edge.
lattice::BoundaryProfile kpz_fixed_point_step(
    const lattice::BoundaryProfile& h, std::int64_t levels,
    std::uint64_t seed);

// Best terminal score max_z [ profile(z) + d(start, (z, top_row)) ] over the
// profile's window; the recursion
//   value(start) = w(start) + max(value(start + e1), value(start + e2))
// holds exactly for starts strictly below the top row.
double profile_passage_value(const lattice::WeightField& field,
                             const lattice::BoundaryProfile& profile,
                             std::int64_t top_row, lattice::Site start);

enum class GeodesicSide { kLeft, kRight };

struct BusemannGeodesic {
  lattice::GeodesicPath path;   // from start up to (exit_col, top_row)
  std::int64_t exit_col = 0;    // maximizing profile column
  double value = 0.0;           // profile(exit_col) + d(start, exit site)
  bool edge_flag = false;       // maximizer at the profile window edge
};

// Geodesic from `start` to the top row driven by a terminal profile: the
// terminal column maximizes profile(z) + d(start, (z, top_row)), with ties
// resolved to the leftmost (side == kLeft) or rightmost maximizer.
BusemannGeodesic busemann_geodesic(const lattice::WeightField& field,
                                   const lattice::BoundaryProfile& profile,
                                   std::int64_t top_row, lattice::Site start,
                                   GeodesicSide side);

}  // namespace sh::scaling
