#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sh/queueing.hpp"
#include "sh/rng.hpp"

using sh::queue::evolve_levels;
using sh::queue::exact_stationary_pair;
using sh::queue::queue_D;
using sh::queue::queue_S;
using sh::queue::sample_mu;
using sh::queue::Sequence;
using sh::queue::stationary_backlog;

namespace {

Sequence seq(std::int64_t k_min, std::initializer_list<double> vals) {
  Sequence s;
  s.k_min = k_min;
  s.values.resize(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) s.values[i++] = v;
  return s;
}

// O(n^2) reference: departure cumulative as an explicit max over start points.
Eigen::ArrayXd brute_cumulative(const Sequence& om, const Sequence& inc, double b) {
  const Eigen::Index n = om.values.size();
  Eigen::ArrayXd F = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index k = 1; k < n; ++k) F[k] = F[k - 1] + inc.values[k];
  Eigen::ArrayXd ft(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    double c = 0.0;
    double best = -1e300;
    for (Eigen::Index k = l; k >= 0; --k) {
      c += om.values[k];  // sum om[k..l]
      best = std::max(best, F[k] + c);
    }
    best = std::max(best, b + c);  // pre-window mass enters at the anchor
    ft[l] = best;
  }
  return ft;
}

}  // namespace

TEST_CASE("three-entry window example") {
  auto om = seq(0, {5, 0, 0});
  auto inc = seq(0, {0, 1, 1});
  auto d = queue_D(om, inc);
  CHECK(d.values[0] == 0.0);
  CHECK(d.values[1] == doctest::Approx(0.0));
  CHECK(d.values[2] == doctest::Approx(0.0));
  auto s = queue_S(om, inc);
  CHECK(s.values[0] == doctest::Approx(5.0));
  CHECK(s.values[1] == doctest::Approx(4.0));
  CHECK(s.values[2] == doctest::Approx(3.0));
}

TEST_CASE("departure and sojourn maps match the frozen brute-force values") {
  auto om = seq(0, {0.5, 2.0, 0.25, 3.0, 0.125, 1.0});
  auto inc = seq(0, {0.0, 1.5, 0.5, 2.5, 0.25, 4.0});

  auto d0 = queue_D(om, inc);
  const double exp_d0[] = {0, 3, 0.25, 3.75, 0.125, 2.125};
  for (int i = 1; i < 6; ++i) CHECK(d0.values[i] == doctest::Approx(exp_d0[i]).epsilon(1e-14));
  auto s0 = queue_S(om, inc);
  const double exp_s0[] = {0.5, 2, 1.75, 3, 2.875, 1};
  for (int i = 0; i < 6; ++i) CHECK(s0.values[i] == doctest::Approx(exp_s0[i]).epsilon(1e-14));

  auto d1 = queue_D(om, inc, 0.7);
  const double exp_d1[] = {0, 2.2999999999999998, 0.25, 3.75, 0.125, 2.125};
  for (int i = 1; i < 6; ++i) CHECK(d1.values[i] == doctest::Approx(exp_d1[i]).epsilon(1e-14));
  auto s1 = queue_S(om, inc, 0.7);
  CHECK(s1.values[0] == doctest::Approx(1.2).epsilon(1e-14));
  for (int i = 1; i < 6; ++i) CHECK(s1.values[i] == doctest::Approx(exp_s0[i]).epsilon(1e-14));
}

TEST_CASE("recursion agrees with the quadratic reference on random windows") {
  const auto s = sh::rng::stream(424242, sh::rng::kTagMisc);
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 20;
    Sequence om{0, Eigen::ArrayXd(n)}, inc{0, Eigen::ArrayXd(n)};
    sh::rng::fill_exp(sh::rng::substream(s, 2 * rep), 0, 1.0, om.values.data(), n);
    sh::rng::fill_exp(sh::rng::substream(s, 2 * rep + 1), 0, 0.5, inc.values.data(), n);
    const double b = (rep % 3 == 0) ? 0.0 : 0.31 * static_cast<double>(rep % 5);
    auto ft = brute_cumulative(om, inc, b);
    auto d = queue_D(om, inc, b);
    auto sj = queue_S(om, inc, b);
    double cum = ft[0];
    CHECK(sj.values[0] == doctest::Approx(ft[0]).epsilon(1e-12));
    double f = 0.0;
    for (Eigen::Index l = 1; l < n; ++l) {
      cum += d.values[l];
      f += inc.values[l];
      CHECK(cum == doctest::Approx(ft[l]).epsilon(1e-12));
      CHECK(sj.values[l] == doctest::Approx(ft[l] - f).epsilon(1e-12));
    }
  }
}

TEST_CASE("edge flag fires when the window edge dominates") {
  bool flag = false;
  auto om = seq(0, {50, 0, 0, 0, 0, 0});
  auto inc = seq(0, {0, 1, 1, 1, 1, 1});
  (void)queue_D(om, inc, 0.0, &flag);
  CHECK(flag);
  // A stable queue forgets the edge quickly.
  flag = true;
  const auto s = sh::rng::stream(7, sh::rng::kTagMisc);
  Sequence om2{0, Eigen::ArrayXd(4000)}, inc2{0, Eigen::ArrayXd(4000)};
  sh::rng::fill_exp(sh::rng::substream(s, 0), 0, 1.0, om2.values.data(), 4000);
  sh::rng::fill_exp(sh::rng::substream(s, 1), 0, 0.5, inc2.values.data(), 4000);
  (void)queue_D(om2, inc2, 0.0, &flag);
  CHECK(!flag);
}

TEST_CASE("input validation") {
  auto om = seq(0, {1, 2, 3});
  CHECK_THROWS_AS((void)queue_D(om, seq(1, {1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS((void)queue_D(om, seq(0, {1, 2})), std::invalid_argument);
  CHECK_THROWS_AS((void)queue_D(om, seq(0, {1, 2, 3}), -0.5), std::invalid_argument);
  CHECK_THROWS_AS(sample_mu({0.4, 0.5}, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_mu({}, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(exact_stationary_pair(0.4, 0.6, 0, 10, 1), std::invalid_argument);
}

TEST_CASE("stationary backlog has the atom-plus-exponential law") {
  const auto s = sh::rng::stream(99, sh::rng::kTagBacklog);
  const double tau = 1.0, rho = 0.4;
  int zeros = 0;
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double w = stationary_backlog(tau, rho, s, static_cast<std::uint64_t>(i));
    if (w == 0.0) ++zeros;
    sum += w;
  }
  // P(W = 0) = 1 - rho/tau = 0.6 ; E[W] = (rho/tau) / (tau - rho) = 2/3.
  CHECK(static_cast<double>(zeros) / n == doctest::Approx(0.6).epsilon(0.02));
  CHECK(sum / n == doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("exactly stationary pair reproduces the output laws from the anchor on") {
  auto st = exact_stationary_pair(1.0, 0.4, 0, 20000, 321);
  const auto& out = st.components[1].values;
  double m = 0;
  for (Eigen::Index i = 1; i < out.size(); ++i) m += out[i];
  m /= static_cast<double>(out.size() - 1);
  CHECK(m == doctest::Approx(2.5).epsilon(0.025));
  // Departures of a stationary queue are uncorrelated at lag 1.
  double c1 = 0, v = 0;
  for (Eigen::Index i = 2; i < out.size(); ++i) {
    c1 += (out[i] - m) * (out[i - 1] - m);
    v += (out[i] - m) * (out[i] - m);
  }
  CHECK(std::abs(c1 / v) < 0.03);
}

TEST_CASE("multiclass sample is deterministic and componentwise ordered") {
  auto a = sample_mu({0.6, 0.5, 0.4}, 0, 800, 20260823);
  auto b = sample_mu({0.6, 0.5, 0.4}, 0, 800, 20260823);
  REQUIRE(a.components.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((a.components[static_cast<std::size_t>(i)].values ==
           b.components[static_cast<std::size_t>(i)].values)
              .all());
  }
  // Cumulatives are ordered: lower-rate components run above higher-rate ones.
  Eigen::ArrayXd c1 = Eigen::ArrayXd::Zero(801), c2 = c1, c3 = c1;
  for (Eigen::Index i = 1; i <= 800; ++i) {
    c1[i] = c1[i - 1] + a.components[0].values[i];
    c2[i] = c2[i - 1] + a.components[1].values[i];
    c3[i] = c3[i - 1] + a.components[2].values[i];
  }
  CHECK((c2 - c1).minCoeff() >= -1e-12);
  CHECK((c3 - c2).minCoeff() >= -1e-12);
}

TEST_CASE("component means settle at their advertised rates away from the anchor") {
  auto st = sample_mu({0.6, 0.5, 0.4}, 0, 6000, 777);
  for (std::size_t i = 0; i < 3; ++i) {
    double m = 0;
    int cnt = 0;
    for (Eigen::Index k = 1000; k <= 6000; ++k) {
      m += st.components[i].values[k];
      ++cnt;
    }
    m /= cnt;
    CHECK(m == doctest::Approx(1.0 / st.rates[i]).epsilon(0.05));
  }
}

TEST_CASE("evolving by rate-1 service rows preserves component means") {
  auto st = sample_mu({0.6, 0.5, 0.4}, 0, 4000, 31337);
  const auto s = sh::rng::stream(31338, sh::rng::kTagBulk);
  std::vector<Sequence> rows;
  for (int r = 0; r < 5; ++r) {
    Sequence row{0, Eigen::ArrayXd(4001)};
    sh::rng::fill_exp(sh::rng::substream(s, static_cast<std::uint64_t>(r)), 0, 1.0,
                      row.values.data(), 4001);
    rows.push_back(row);
  }
  auto ev = evolve_levels(st, rows);
  for (std::size_t i = 0; i < 3; ++i) {
    double m = 0;
    int cnt = 0;
    for (Eigen::Index k = 1500; k <= 4000; ++k) {
      m += ev.components[i].values[k];
      ++cnt;
    }
    m /= cnt;
    CHECK(m == doctest::Approx(1.0 / st.rates[i]).epsilon(0.06));
  }
}
