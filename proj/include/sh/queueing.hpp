#pragma once
// Windowed queueing maps on bi-infinite sequences, restricted to a finite
// window [k_min, k_max].  For a service sequence omega and inter-arrival
// sequence I, with F the cumulative of I anchored at F(k_min) = 0,
//   F~(l) = max_{k_min <= k <= l} { F(k) + sum_{i=k..l} omega(i) } .
// The departure map D returns the increments of F~ and the sojourn map S
// returns F~ - F.  The entry at k_min of an increment sequence is an unused
// anchor slot (stored as 0).
//
// Multiclass samples stack departure maps: with inter-arrival sequences
// I^1, ..., I^n at strictly decreasing rates, component i is
//   D^(i)(I^1, ..., I^i),   D^(1) = id,
//   D^(k)(I^1, ..., I^k) = D(I^1, D^(k-1)(I^2, ..., I^k)) ,
// where the first argument of D plays the service role.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sh/rng.hpp"

namespace sh::queue {

// Values indexed by a window of consecutive integers [k_min, k_min + n - 1].
struct Sequence {
  std::int64_t k_min = 0;
  Eigen::ArrayXd values;

  std::int64_t k_max() const { return k_min + static_cast<std::int64_t>(values.size()) - 1; }
  double at(std::int64_t k) const { return values[static_cast<Eigen::Index>(k - k_min)]; }
  double& at(std::int64_t k) { return values[static_cast<Eigen::Index>(k - k_min)]; }
};

// Departure map.  `initial_backlog` adds mass max_{k < k_min}(F(k) + ...)
// carried in from before the window (0 reproduces the anchored map).  When
// `edge_flag` is given, it is set if some F~-maximizer in the second half of
// the window sits at k_min, i.e. the window edge still dominates.
Sequence queue_D(const Sequence& omega, const Sequence& inter_arrival,
                 double initial_backlog = 0.0, bool* edge_flag = nullptr);

// Sojourn map S = F~ - F on the same window (the k_min entry is the backlog
// at the anchor).
Sequence queue_S(const Sequence& omega, const Sequence& inter_arrival,
                 double initial_backlog = 0.0);

// Draws the stationary anchor backlog of a queue with service rate
// `service_rate` and arrival rate `arrival_rate` < service_rate: an atom at 0
// of mass 1 - arrival/service, otherwise Exp(service - arrival).
double stationary_backlog(double service_rate, double arrival_rate, const rng::Stream& s,
                          std::uint64_t index);

// Multiclass state: per-component increment sequences on a shared window,
// rates strictly decreasing.
struct MulticlassState {
  std::vector<double> rates;
  std::vector<Sequence> components;
};

// Samples the n i.i.d. exponential inputs on [k_min, k_max] and stacks the
// departure maps.  Windows are anchored at the left edge; entries a few
// relaxation lengths to the right of k_min follow the limiting law.
MulticlassState sample_mu(const std::vector<double>& rates, std::int64_t k_min,
                          std::int64_t k_max, std::uint64_t seed);

// Applies the departure map with each bulk row in turn as the shared service
// sequence, to every component.
MulticlassState evolve_levels(const MulticlassState& state,
                              const std::vector<Sequence>& bulk_rows);

// Exactly stationary two-component sample on a window: component 1 is i.i.d.
// Exp(rate1); component 2 is the departure sequence of the rate2 arrivals
// through the rate1 service, with the anchor backlog drawn from its
// stationary law so the output law holds from k_min + 1 on.
MulticlassState exact_stationary_pair(double rate1, double rate2, std::int64_t k_min,
                                      std::int64_t k_max, std::uint64_t seed);

}  // namespace sh::queue
