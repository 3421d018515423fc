#pragma once
// Sampling of the multi-line horizon process and its difference structure.
//
// A horizon sample at directions xi_1 < ... < xi_k is obtained by drawing k
// independent two-sided Brownian motions with drifts 2*xi_i and diffusivity
// sqrt(2) on a common grid and pushing them through the stacked transform
// Phi^k.  The pairwise transform is, for anchored f and g,
//
//   Phi(f,g)(y) = f(y) + M(y) - M(0),   M(y) = max_{x <= y} (g - f)(x),
//
// evaluated here via its two-branch form with W_y(h) = max_{x<=y}[h(y)-h(x)]
// and negative part [a]^- = max(-a, 0):
//   y >= 0 :  f(y) + [ W_0(f-g) + min_{0<=x<=y} (f-g)(x) ]^-
//   y <  0 :  f(y) - [ W_y(f-g) + min_{y<x<=0} ((f-g)(x) - (f-g)(y)) ]^-
// Half-infinite maxima are truncated at grid_min; when the truncated maximum
// is attained at the window edge the result carries an edge flag.
//
// Differences of adjacent output lines are nondecreasing; their first
// increase locations (tau, xi) form the jump point process.  Adjacent-pair
// differences at direction gap eps admit an exact window representation:
// the difference path is a Brownian motion with drift 2*eps and diffusivity
// 2, the left-edge backlog is an independent Exp(eps) variable Q, and the
// observed difference profile is max(Q, running max) - Q.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sh/grid_function.hpp"
#include "sh/rng.hpp"

namespace sh::horizon {

struct GridSpec {
  double min = -1.0;
  double max = 1.0;
  double step = 1.0 / 1024.0;
};

struct HorizonSample {
  std::vector<double> directions;
  std::vector<GridFunction> lines;
  std::uint64_t seed = 0;
};

struct JumpRecord {
  double xi = 0.0;
  double tau = std::numeric_limits<double>::infinity();
  // Difference profile after the jump, H(tau + u) - H(tau), on the remaining
  // window; empty when tau is infinite or capture was not requested.
  GridFunction restarted;

  bool finite() const { return std::isfinite(tau); }
};

// Two-sided Brownian motion on the grid, anchored at 0, increments generated
// outward from 0 in both directions.
GridFunction sample_two_sided_bm(double drift, double diffusivity, const GridSpec& grid,
                                 const rng::Stream& s);
GridFunction sample_two_sided_bm(double drift, double diffusivity, const GridSpec& grid,
                                 std::uint64_t seed);

// Pairwise transform (two-branch evaluation; see file header).
GridFunction phi(const GridFunction& f, const GridFunction& g);

// Stacked transform: component 1 = f1, component j = Phi(f1, [Phi^{k-1}(f2..fk)]_{j-1}).
std::vector<GridFunction> phi_k(const std::vector<GridFunction>& inputs);

// Draws the input motions and applies phi_k.
HorizonSample sample_horizon(const std::vector<double>& directions, const GridSpec& grid,
                             std::uint64_t seed);

// Difference of lines i and i-1 (1-based, i >= 2) with its first increase
// point and restarted profile.  `threshold` is the increase detection level.
JumpRecord difference_process(const HorizonSample& sample, std::size_t i,
                              double threshold = 1e-9);
// The raw difference line itself (anchored, nondecreasing up to threshold).
GridFunction difference_line(const HorizonSample& sample, std::size_t i);

// --- exact adjacent-pair representation -----------------------------------

// Difference path of one adjacent pair on [0, x_max] sampled at step delta.
struct PairPath {
  double gap = 0.0;       // direction gap
  double delta = 0.0;
  double backlog = 0.0;   // Q ~ Exp(gap)
  Eigen::ArrayXd cum;     // path cumulative, cum[0] = 0
  Eigen::ArrayXd cummax;  // running max of cum
  // Additive correction estimating the continuum running max from the grid
  // one (0.5826 * diffusivity * sqrt(delta)).
  double sup_correction = 0.0;
};

PairPath sample_pair_path(double gap, double x_max, double delta, const rng::Stream& s);

// First u > 0 with estimated continuum sup over [0,u] exceeding backlog +
// threshold; +inf if none in the window.
double first_crossing(const PairPath& p, double threshold = 1e-9);

// Restarted profile from grid index j0: u -> cummax[j0 + u] - cummax[j0].
GridFunction restarted_profile(const PairPath& p, Eigen::Index j0);

// Jump records of all adjacent pairs of the dyadic direction mesh
// {xi_lo + j * (xi_hi - xi_lo) * 2^-mesh_n} over the window [0, x_max],
// optionally coupled with the next-coarser mesh (coarse pair difference =
// sum of its two fine pair differences, fresh coarse backlog).
struct MeshJumps {
  std::vector<JumpRecord> fine;
  std::vector<JumpRecord> coarse;
};

MeshJumps sample_mesh_jumps(double xi_lo, double xi_hi, int mesh_n, double x_max, double delta,
                            const rng::Stream& replica_stream, bool with_coarse,
                            bool capture_restarted);

// One point (tau, xi) per adjacent mesh pair with finite tau, per replica.
std::vector<std::vector<JumpRecord>> jump_point_process(double xi_lo, double xi_hi, int mesh_n,
                                                        double x_max, double delta,
                                                        std::uint64_t seed,
                                                        std::int64_t replicas);

}  // namespace sh::horizon
