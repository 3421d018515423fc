#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sh/lattice.hpp"

using sh::lattice::BoundaryProfile;
using sh::lattice::halfplane_left_width;
using sh::lattice::halfplane_with_boundary;
using sh::lattice::passage_table;
using sh::lattice::sample_weight_field;
using sh::lattice::Site;
using sh::lattice::stationary_quadrant;
using sh::lattice::trace_geodesic;
using sh::lattice::WeightField;

namespace {

WeightField manual_field(std::vector<std::vector<double>> rows) {
  WeightField f;
  f.seed = 0;
  f.origin_col = 0;
  f.origin_row = 0;
  const auto h = static_cast<Eigen::Index>(rows.size());
  const auto w = static_cast<Eigen::Index>(rows[0].size());
  f.weights.resize(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) f.weights(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return f;
}

}  // namespace

TEST_CASE("2x2 passage values include both endpoints") {
  // weights: row 0 = (1, 2), row 1 = (3, 4)
  auto f = manual_field({{1, 2}, {3, 4}});
  auto t = passage_table(f, {0, 0});
  CHECK(t.at(0, 0) == doctest::Approx(1));
  CHECK(t.at(1, 0) == doctest::Approx(3));
  CHECK(t.at(0, 1) == doctest::Approx(4));
  CHECK(t.at(1, 1) == doctest::Approx(8));
  auto g = trace_geodesic(t, {1, 1});
  REQUIRE(g.sites.size() == 3);
  CHECK(g.sites[0] == Site{0, 0});
  CHECK(g.sites[1] == Site{0, 1});
  CHECK(g.sites[2] == Site{1, 1});
}

TEST_CASE("geodesic tie steps to the e2-predecessor") {
  auto f = manual_field({{1, 1}, {1, 1}});
  auto t = passage_table(f, {0, 0});
  CHECK(t.at(1, 0) == doctest::Approx(2));
  CHECK(t.at(0, 1) == doctest::Approx(2));
  auto g = trace_geodesic(t, {1, 1});
  REQUIRE(g.sites.size() == 3);
  CHECK(g.sites[1] == Site{1, 0});  // predecessor below the target
}

TEST_CASE("geodesic weight sum matches the passage value") {
  auto f = sample_weight_field(91, {0, 0}, 24, 16);
  auto t = passage_table(f, {0, 0});
  auto g = trace_geodesic(t, {23, 15});
  double s = 0;
  for (auto [c, r] : g.sites) s += f.at(c, r);
  CHECK(s == doctest::Approx(t.at(23, 15)).epsilon(1e-12));
  CHECK(g.sites.size() == 24 + 16 - 1);
  // Paths move by unit e1/e2 steps only.
  for (std::size_t i = 1; i < g.sites.size(); ++i) {
    const auto dc = g.sites[i].first - g.sites[i - 1].first;
    const auto dr = g.sites[i].second - g.sites[i - 1].second;
    CHECK(dc + dr == 1);
    CHECK(dc * dr == 0);
  }
}

TEST_CASE("cells outside the source cone are marked absent") {
  auto f = sample_weight_field(7, {-2, 3}, 5, 4);
  auto t = passage_table(f, {-1, 4});
  CHECK(!t.has(-2, 4));
  CHECK(!t.has(-1, 3));
  CHECK(t.has(-1, 4));
  CHECK(t.has(2, 6));
  CHECK(!t.has(99, 99));
  CHECK_THROWS_AS((void)trace_geodesic(t, {-2, 3}), std::invalid_argument);
}

TEST_CASE("weight fields are site-keyed: overlaps agree, seeds decorrelate") {
  auto a = sample_weight_field(555, {0, 0}, 12, 10);
  auto b = sample_weight_field(555, {5, 4}, 12, 10);
  for (std::int64_t r = 4; r < 10; ++r)
    for (std::int64_t c = 5; c < 12; ++c) CHECK(a.at(c, r) == b.at(c, r));
  auto d = sample_weight_field(556, {0, 0}, 12, 10);
  CHECK((a.weights - d.weights).abs().maxCoeff() > 1e-6);
}

TEST_CASE("weight field moments look exponential with rate 1") {
  auto f = sample_weight_field(2024, {0, 0}, 128, 128);
  const double mean = f.weights.mean();
  const double var = (f.weights - mean).square().mean();
  CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
  CHECK(var == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("stationary quadrant: boundary laws and exit bookkeeping") {
  const double rho = 0.4;
  auto q = stationary_quadrant(31, rho, {0, 0}, 40, 30);
  CHECK(q.table.at(0, 0) == 0.0);

  // Boundary increments have the advertised means.
  double mh = 0, mv = 0;
  for (std::int64_t c = 1; c < 40; ++c) mh += q.table.at(c, 0) - q.table.at(c - 1, 0);
  for (std::int64_t r = 1; r < 30; ++r) mv += q.table.at(0, r) - q.table.at(0, r - 1);
  mh /= 39;
  mv /= 29;
  CHECK(mh == doctest::Approx(1.0 / rho).epsilon(0.5));
  CHECK(mv == doctest::Approx(1.0 / (1 - rho)).epsilon(0.5));

  // Exactly one exit time is nonzero everywhere away from the corner.
  for (std::int64_t r = 0; r < 30; ++r) {
    for (std::int64_t c = 0; c < 40; ++c) {
      if (r == 0 && c == 0) continue;
      auto [t1, t2] = q.exit_times(c, r);
      CHECK(((t1 > 0) != (t2 > 0)));
    }
  }

  // The label DP agrees with backtracked geodesics (ties are measure-zero).
  for (auto [tc, tr] : {Site{39, 29}, Site{17, 23}, Site{30, 5}}) {
    auto g = trace_geodesic(q.table, {tc, tr});
    REQUIRE(g.exit_record.has_value());
    auto [axis, k] = *g.exit_record;
    auto [t1, t2] = q.exit_times(tc, tr);
    CHECK(axis == (t1 > 0 ? 1 : 2));
    CHECK(k == (t1 > 0 ? t1 : t2));
  }
}

TEST_CASE("stationary quadrant keeps the horizontal increment mean at depth") {
  // Increment-stationarity: along any row n, d-increments remain mean 1/rho.
  const double rho = 0.5;
  double acc = 0;
  std::int64_t cnt = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto q = stationary_quadrant(900 + seed, rho, {0, 0}, 61, 21);
    for (std::int64_t c = 21; c <= 60; ++c) {
      acc += q.table.at(c, 20) - q.table.at(c - 1, 20);
      ++cnt;
    }
  }
  CHECK(acc / static_cast<double>(cnt) == doctest::Approx(1.0 / rho).epsilon(0.06));
}

TEST_CASE("half-plane narrow wedge reduces to point-to-point passage") {
  auto f = sample_weight_field(404, {-6, 1}, 20, 7);
  auto h = BoundaryProfile::narrow_wedge(-2, -6, 13);
  std::vector<Site> targets{{3, 4}, {-2, 1}, {13, 7}, {0, 2}};
  auto res = halfplane_with_boundary(f, h, targets);
  auto t = passage_table(f, {-2, 1});
  for (std::size_t i = 0; i < targets.size(); ++i) {
    CHECK(res.value[i] == doctest::Approx(t.at(targets[i].first, targets[i].second)).epsilon(1e-13));
    CHECK(res.exit_k[i] == -2);
    CHECK(res.edge_flag[i] == 0);
  }
  CHECK_THROWS_AS(halfplane_with_boundary(f, h, std::vector<Site>{{-4, 3}}),
                  std::invalid_argument);
}

TEST_CASE("half-plane DP equals brute-force max over boundary sites") {
  auto f = sample_weight_field(12321, {-5, 1}, 18, 6);
  auto h = BoundaryProfile::stationary(77, 0.5, -5, 12);
  std::vector<Site> targets{{6, 5}, {0, 3}, {12, 6}, {-5, 2}};
  auto res = halfplane_with_boundary(f, h, targets);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto [tc, tr] = targets[i];
    double best = -std::numeric_limits<double>::infinity();
    std::int64_t best_k = h.k_min;
    for (std::int64_t k = h.k_min; k <= std::min<std::int64_t>(tc, h.k_max()); ++k) {
      auto t = passage_table(f, {k, 1});
      const double v = h.at(k) + t.at(tc, tr);
      if (v >= best) {
        best = v;
        best_k = k;
      }
    }
    CHECK(res.value[i] == doctest::Approx(best).epsilon(1e-12));
    CHECK(res.exit_k[i] == best_k);
    CHECK(res.edge_flag[i] == ((best_k == h.k_min || best_k == h.k_max()) ? 1 : 0));
  }
}

TEST_CASE("stationary boundary profiles are window-stable and anchored") {
  auto a = BoundaryProfile::stationary(5150, 0.7, -30, 30);
  auto b = BoundaryProfile::stationary(5150, 0.7, -10, 50);
  CHECK(a.at(0) == 0.0);
  for (std::int64_t k = -10; k <= 30; ++k) CHECK(a.at(k) == doctest::Approx(b.at(k)).epsilon(1e-15));
  CHECK(a.left_rate_hint.has_value());
  double mean = (a.at(30) - a.at(-30)) / 60.0;
  CHECK(mean == doctest::Approx(1.0 / 0.7).epsilon(0.3));
}

TEST_CASE("default half-plane boundary width") {
  CHECK(halfplane_left_width(1) == 64);
  CHECK(halfplane_left_width(100) == 796);
  CHECK(halfplane_left_width(0) == 64);
}
