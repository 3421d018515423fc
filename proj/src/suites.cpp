// Verification suites and the experiment harness around them.
//
// Each suite draws its randomness through streams keyed by
// (config seed, replica index) only, writes per-replica results into
// preallocated slots, and aggregates single-threaded afterwards, so the
// produced artifacts are byte-identical across reruns and across worker
// counts.

#include "sh/suites.hpp"

#include "sh/horizon.hpp"
#include "sh/io.hpp"
#include "sh/lattice.hpp"
#include "sh/queueing.hpp"
#include "sh/rng.hpp"
#include "sh/scaling.hpp"
#include "sh/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sh::harness {

namespace {

using stats::TestReport;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// small utilities
// ---------------------------------------------------------------------------

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index) {
  return rng::block_at(rng::stream(seed, rng::kTagMisc), index, 0x5EEDull).a;
}

// Runs body(0..n-1) on up to `parallelism` workers.  Work items are handed
// out dynamically; determinism comes from indexed output slots, not from the
// schedule.  The first exception wins and is rethrown on the caller.
void for_each_replica(std::int64_t n, int parallelism,
                      const std::function<void(std::int64_t)>& body) {
  const std::int64_t workers =
      std::min<std::int64_t>(std::max(parallelism, 1), std::max<std::int64_t>(n, 1));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto drain = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

TestReport make_report(std::string suite, double statistic, double expected, double dispersion,
                       double score, bool pass, std::int64_t replicas, std::uint64_t seed) {
  TestReport r;
  r.suite = std::move(suite);
  r.statistic = statistic;
  r.expected = expected;
  r.dispersion = dispersion;
  r.score = score;
  r.pass = pass;
  r.replicas = replicas;
  r.seed = seed;
  return r;
}

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

std::function<double(double)> exp_cdf(double rate) {
  return [rate](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x); };
}

double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Pearson correlation with the Fisher z statistic sqrt(n-3) * atanh(r).
struct Correlation {
  double r = 0.0;
  double z = 0.0;
};

Correlation pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  const double ma = sample_mean(a), mb = sample_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  Correlation c;
  c.r = sab / std::sqrt(std::max(saa * sbb, 1e-300));
  c.z = std::atanh(std::clamp(c.r, -0.999999999, 0.999999999)) * std::sqrt(n - 3.0);
  return c;
}

std::string row_cells(std::initializer_list<std::string> cells) {
  return io::csv_row(std::vector<std::string>(cells));
}

// ---------------------------------------------------------------------------
// suite: queue-dp-equivalence
//
// The windowed departure map iterated over bulk rows must reproduce the
// increments of the half-plane dynamic program driven by the same boundary
// profile and the same weights, level by level, to within float roundoff.
// ---------------------------------------------------------------------------

SuiteOutcome suite_queue_dp(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(100);
  const std::int64_t window = cfg.integer("window", 512);
  const std::int64_t levels = cfg.integer("levels", 50);
  const double rho = cfg.real("rho", 0.5);
  const double tol = cfg.real("tolerance", 1e-9);
  if (window < 2 || levels < 1) throw std::invalid_argument("queue-dp-equivalence: window >= 2 and levels >= 1 required");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("queue-dp-equivalence: rho must be in (0,1)");

  std::vector<double> worst(static_cast<std::size_t>(reps), 0.0);
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto h = lattice::BoundaryProfile::stationary(sd, rho, 0, window - 1);
    const auto field = lattice::sample_weight_field(sd, {0, 1}, window, levels);
    std::vector<lattice::Site> targets;
    targets.reserve(static_cast<std::size_t>(window * levels));
    for (std::int64_t n = 1; n <= levels; ++n)
      for (std::int64_t m = 0; m < window; ++m) targets.push_back({m, n});
    const auto dp = lattice::halfplane_with_boundary(field, h, targets);

    queue::Sequence chain{0, Eigen::ArrayXd::Zero(window)};
    for (std::int64_t k = 1; k < window; ++k) chain.values[k] = h.at(k) - h.at(k - 1);
    double bad = 0.0;
    std::size_t base = 0;
    for (std::int64_t n = 1; n <= levels; ++n, base += static_cast<std::size_t>(window)) {
      queue::Sequence omega{0, Eigen::ArrayXd(window)};
      for (std::int64_t m = 0; m < window; ++m) omega.values[m] = field.at(m, n);
      chain = queue::queue_D(omega, chain);
      for (std::int64_t m = 1; m < window; ++m) {
        const double dp_inc = dp.value[base + static_cast<std::size_t>(m)] -
                              dp.value[base + static_cast<std::size_t>(m) - 1];
        bad = std::max(bad, std::abs(chain.values[m] - dp_inc));
      }
    }
    worst[static_cast<std::size_t>(r)] = bad;
  });

  SuiteOutcome out;
  const double stat = *std::max_element(worst.begin(), worst.end());
  out.reports.push_back(make_report("queue-dp-equivalence", stat, 0.0, tol, stat / tol,
                                    stat <= tol, reps, cfg.seed));
  out.replica_header = "replica,max_abs_increment_diff";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r), io::format17(worst[static_cast<std::size_t>(r)])}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: mu-invariance
//
// The stacked multiclass measure must be preserved by the level evolution:
// after pushing the exact three-rate sample through 50 rate-1 service rows,
// each component's increments away from the window edge keep their original
// exponential marginal.
// ---------------------------------------------------------------------------

SuiteOutcome suite_mu_invariance(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(1000);
  const std::int64_t window = cfg.integer("window", 5120);  // right edge of [0, window]
  const std::int64_t levels = cfg.integer("levels", 50);
  const std::int64_t ncoords = cfg.integer("coords", 10);
  const std::vector<double> rates = {cfg.real("rate1", 0.6), cfg.real("rate2", 0.5),
                                     cfg.real("rate3", 0.4)};
  if (reps < 20) throw std::runtime_error("mu-invariance: needs >= 20 replicas for the KS layer");
  if (ncoords < 1 || window / ncoords < 1)
    throw std::invalid_argument("mu-invariance: coords must fit the window");
  const std::int64_t spacing = window / ncoords;
  const std::size_t ncomp = rates.size();

  std::vector<double> slot(ncomp * static_cast<std::size_t>(ncoords * reps));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    auto state = queue::sample_mu(rates, 0, window, sd);
    std::vector<queue::Sequence> rows(static_cast<std::size_t>(levels));
    const rng::Stream bulk = rng::stream(sd, rng::kTagBulk);
    for (std::int64_t l = 0; l < levels; ++l) {
      auto& row = rows[static_cast<std::size_t>(l)];
      row.k_min = 0;
      row.values.resize(window + 1);
      rng::fill_exp(rng::substream(bulk, static_cast<std::uint64_t>(l)), 0, 1.0,
                    row.values.data(), static_cast<std::size_t>(window + 1));
    }
    state = queue::evolve_levels(state, rows);
    for (std::size_t i = 0; i < ncomp; ++i)
      for (std::int64_t j = 0; j < ncoords; ++j)
        slot[(i * static_cast<std::size_t>(ncoords) + static_cast<std::size_t>(j)) *
                 static_cast<std::size_t>(reps) +
             static_cast<std::size_t>(r)] =
            state.components[i].at(spacing * (j + 1));
  });

  SuiteOutcome out;
  out.replica_header = "replica,comp1_last,comp2_last,comp3_last";
  for (std::int64_t r = 0; r < reps; ++r) {
    std::vector<std::string> cells{std::to_string(r)};
    for (std::size_t i = 0; i < ncomp; ++i)
      cells.push_back(io::format17(
          slot[(i * static_cast<std::size_t>(ncoords) + static_cast<std::size_t>(ncoords - 1)) *
                   static_cast<std::size_t>(reps) +
               static_cast<std::size_t>(r)]));
    out.replica_rows.push_back(io::csv_row(cells));
  }
  for (std::size_t i = 0; i < ncomp; ++i) {
    double worst_d = 0.0;
    double score = 1.0;
    for (std::int64_t j = 0; j < ncoords; ++j) {
      std::vector<double> col(
          slot.begin() + static_cast<std::ptrdiff_t>(
                             (i * static_cast<std::size_t>(ncoords) + static_cast<std::size_t>(j)) *
                             static_cast<std::size_t>(reps)),
          slot.begin() + static_cast<std::ptrdiff_t>(
                             (i * static_cast<std::size_t>(ncoords) + static_cast<std::size_t>(j) + 1) *
                             static_cast<std::size_t>(reps)));
      const double d = stats::ks_statistic(std::move(col), exp_cdf(rates[i]));
      worst_d = std::max(worst_d, d);
      const double adj = std::min(1.0, static_cast<double>(ncoords) *
                                           stats::ks_pvalue(d, static_cast<std::size_t>(reps)));
      score = std::min(score, adj);
    }
    out.reports.push_back(make_report(
        "mu-invariance:rate=" + fmt_g(rates[i]), worst_d, 0.0,
        stats::ks_critical(0.01 / static_cast<double>(ncoords), static_cast<std::size_t>(reps)),
        score, score > 0.01, reps, cfg.seed));
  }
  return out;
}

// ---------------------------------------------------------------------------
// suite: queue-output-law
//
// One exactly stationary queue step per replica: with service draws Exp(tau),
// one arrival gap Exp(rho) and the anchor holding a stationary waiting time,
// the interdeparture gap is Exp(rho) and the sojourn is Exp(tau - rho),
// both exactly, so a KS test against those laws must pass.
// ---------------------------------------------------------------------------

SuiteOutcome suite_queue_output(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(10000);
  const double rho = cfg.real("rho", 0.4);
  const double tau = cfg.real("tau", 1.0);
  if (!(rho > 0.0 && rho < tau)) throw std::invalid_argument("queue-output-law: need 0 < rho < tau");
  if (reps < 20) throw std::runtime_error("queue-output-law: needs >= 20 replicas");

  std::vector<double> inter(static_cast<std::size_t>(reps));
  std::vector<double> sojourn(static_cast<std::size_t>(reps));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const rng::Stream sq = rng::stream(sd, rng::kTagSeq);
    const double gap = rng::exp_at(sq, 0, rho);
    const double service0 = rng::exp_at(sq, 1, tau);
    const double service1 = rng::exp_at(sq, 2, tau);
    const double waiting =
        queue::stationary_backlog(tau, rho, rng::stream(sd, rng::kTagBacklog), 0);
    queue::Sequence omega{0, Eigen::ArrayXd(2)};
    omega.values << service0, service1;
    queue::Sequence arrivals{0, Eigen::ArrayXd(2)};
    arrivals.values << 0.0, gap;
    inter[static_cast<std::size_t>(r)] = queue::queue_D(omega, arrivals, waiting).values[1];
    sojourn[static_cast<std::size_t>(r)] = queue::queue_S(omega, arrivals, waiting).values[1];
  });

  SuiteOutcome out;
  auto bonferroni2 = [&](TestReport r) {
    r.score = std::min(1.0, 2.0 * r.score);
    r.pass = r.score > 0.01;
    return r;
  };
  out.reports.push_back(bonferroni2(
      stats::ks_test(inter, exp_cdf(rho), "queue-output-law:interdeparture", cfg.seed)));
  out.reports.push_back(bonferroni2(
      stats::ks_test(sojourn, exp_cdf(tau - rho), "queue-output-law:sojourn", cfg.seed)));
  out.replica_header = "replica,interdeparture,sojourn";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r),
                                          io::format17(inter[static_cast<std::size_t>(r)]),
                                          io::format17(sojourn[static_cast<std::size_t>(r)])}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: sh-marginals
//
// In a joint three-line horizon sample at directions {-1, 0, 1}, every line's
// increment over [0, 1] keeps the input marginal: mean 2*xi, variance 2.
// ---------------------------------------------------------------------------

SuiteOutcome suite_sh_marginals(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(10000);
  const double grid_min = cfg.real("grid_min", -16.0);
  const double step = cfg.real("step", 1.0 / 2048.0);
  const std::vector<double> dirs = {-1.0, 0.0, 1.0};
  if (!(grid_min < -1.0)) throw std::invalid_argument("sh-marginals: grid_min must leave left margin");

  std::vector<std::vector<double>> inc(dirs.size(), std::vector<double>(static_cast<std::size_t>(reps)));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto hs = horizon::sample_horizon(dirs, {grid_min, 1.0, step}, sd);
    for (std::size_t i = 0; i < dirs.size(); ++i)
      inc[i][static_cast<std::size_t>(r)] = hs.lines[i].increment(0.0, 1.0);
  });

  SuiteOutcome out;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    out.reports.push_back(stats::moment_check(inc[i], 2.0 * dirs[i], 2.0, 3.0, 0.10,
                                              "sh-marginals:xi=" + fmt_g(dirs[i]), cfg.seed));
  out.replica_header = "replica,increment_xi_m1,increment_xi_0,increment_xi_p1";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r),
                                          io::format17(inc[0][static_cast<std::size_t>(r)]),
                                          io::format17(inc[1][static_cast<std::size_t>(r)]),
                                          io::format17(inc[2][static_cast<std::size_t>(r)])}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: separation
//
// Monte Carlo of the closed-form probability that the ordered difference of
// two adjacent lines at drift gap xi grows by at most z over a symmetric
// window of half-width x.  Uses the exact window representation of the pair
// difference: total growth = max(S - Q, 0) with S the window supremum of a
// drift-xi, diffusivity-2 path and Q ~ Exp(xi/2) independent, so the event
// is {S <= Q + z}.  The grid supremum carries the standard continuum
// correction.
// ---------------------------------------------------------------------------

SuiteOutcome suite_separation(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(10000);
  const double delta = cfg.real("delta", 1.0 / 4096.0);
  const std::vector<double> xis = {0.5, 1.0};
  const std::vector<double> xs = {0.5, 1.0};
  const std::vector<double> zs = {0.0, 0.5, 1.0};

  const std::size_t ncombo = xis.size() * xs.size();
  std::vector<std::vector<double>> margin(ncombo, std::vector<double>(static_cast<std::size_t>(reps)));
  for_each_replica(reps * static_cast<std::int64_t>(ncombo), cfg.parallelism, [&](std::int64_t t) {
    const auto c = static_cast<std::size_t>(t / reps);
    const std::int64_t r = t % reps;
    const double xi = xis[c / xs.size()];
    const double x = xs[c % xs.size()];
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(t));
    const auto path = horizon::sample_pair_path(xi / 2.0, 2.0 * x, delta, rng::stream(sd, rng::kTagBm));
    const double sup = path.cummax[path.cummax.size() - 1] + path.sup_correction;
    margin[c][static_cast<std::size_t>(r)] = sup - path.backlog;
  });

  SuiteOutcome out;
  out.replica_header = "combo,replica,sup_minus_backlog";
  for (std::size_t c = 0; c < ncombo; ++c)
    for (std::int64_t r = 0; r < reps; ++r)
      out.replica_rows.push_back(row_cells({std::to_string(c), std::to_string(r),
                                            io::format17(margin[c][static_cast<std::size_t>(r)])}));
  for (std::size_t c = 0; c < ncombo; ++c) {
    const double xi = xis[c / xs.size()];
    const double x = xs[c % xs.size()];
    for (double z : zs) {
      std::int64_t hits = 0;
      for (double m : margin[c]) hits += m <= z ? 1 : 0;
      const double phat = static_cast<double>(hits) / static_cast<double>(reps);
      const double closed = stats::separation_formula(xi, x, z);
      const double se = std::sqrt(std::max(closed * (1.0 - closed), 1e-12) /
                                  static_cast<double>(reps));
      const double zscore = (phat - closed) / se;
      out.reports.push_back(make_report(
          "separation:xi" + fmt_g(xi) + "-x" + fmt_g(x) + "-z" + fmt_g(z), phat, closed, se,
          zscore, std::abs(zscore) <= 3.0, reps, cfg.seed));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// suites: jump-count and jump-intensity
//
// Jump records of all adjacent pairs of a dyadic direction mesh over (0,1).
// jump-count compares the mean number of occupied cells of the next-coarser
// mesh in (0,1] x (0,1) against 2 sqrt(2/pi) and requires the count to move
// by less than one standard error under refinement to the fine mesh.  A
// coarse cell is occupied exactly when one of its two fine subcells records
// a jump, so the two counts partition the same sampled jump structure and
// their difference is the number of doubly-occupied coarse cells.
// jump-intensity feeds the fine records to the rectangle/intensity
// comparison over (0, x_max] x (0, 1).
// ---------------------------------------------------------------------------

struct JumpData {
  std::vector<double> coarse_count;
  std::vector<double> fine_count;
  std::vector<std::vector<std::pair<double, double>>> points;  // (tau, xi) per replica
};

JumpData collect_jumps(const ExperimentConfig& cfg, std::int64_t reps, int mesh_n, double x_max,
                       double delta) {
  JumpData data;
  data.coarse_count.assign(static_cast<std::size_t>(reps), 0.0);
  data.fine_count.assign(static_cast<std::size_t>(reps), 0.0);
  data.points.assign(static_cast<std::size_t>(reps), {});
  const double cells = static_cast<double>(std::int64_t{1} << mesh_n);
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto mj = horizon::sample_mesh_jumps(0.0, 1.0, mesh_n, x_max, delta,
                                               rng::stream(sd, rng::kTagBm), false, false);
    auto& pts = data.points[static_cast<std::size_t>(r)];
    std::vector<std::uint8_t> coarse_hit(static_cast<std::size_t>(std::max<std::int64_t>(
                                             1, (std::int64_t{1} << mesh_n) / 2)),
                                         0);
    double nf = 0.0;
    for (const auto& rec : mj.fine) {
      if (!rec.finite()) continue;
      pts.emplace_back(rec.tau, rec.xi);
      if (rec.tau <= 1.0) {
        nf += 1.0;
        // rec.xi is the right edge of the fine cell; recover its index.
        const std::int64_t pair = std::llround(rec.xi * cells) - 1;
        coarse_hit[static_cast<std::size_t>(pair / 2)] = 1;
      }
    }
    double nc = 0.0;
    for (const std::uint8_t hit : coarse_hit) nc += hit;
    data.fine_count[static_cast<std::size_t>(r)] = nf;
    data.coarse_count[static_cast<std::size_t>(r)] = nc;
  });
  return data;
}

SuiteOutcome suite_jump_count(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(1000);
  const int mesh_n = static_cast<int>(cfg.integer("mesh_n", 9));  // coarse mesh = mesh_n - 1
  const double x_max = cfg.real("x_max", 2.0);
  const double delta = cfg.real("delta", 1.0 / 1024.0);
  const JumpData data = collect_jumps(cfg, reps, mesh_n, x_max, delta);

  const double target = 2.0 * std::sqrt(2.0 / M_PI);
  const double mean_coarse = sample_mean(data.coarse_count);
  const double mean_fine = sample_mean(data.fine_count);
  const double se = std::sqrt(sample_var(data.coarse_count) / static_cast<double>(reps));
  const double z = (mean_coarse - target) / se;
  const double shift = std::abs(mean_fine - mean_coarse) / se;

  SuiteOutcome out;
  out.reports.push_back(make_report("jump-count", mean_coarse, target, se, z,
                                    std::abs(z) <= 3.0, reps, cfg.seed));
  out.reports.push_back(make_report("jump-count:refined", mean_fine, mean_coarse, se, shift,
                                    shift <= 1.0, reps, cfg.seed));
  out.replica_header = "replica,coarse_count,fine_count";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(
        row_cells({std::to_string(r), io::format17(data.coarse_count[static_cast<std::size_t>(r)]),
                   io::format17(data.fine_count[static_cast<std::size_t>(r)])}));
  return out;
}

SuiteOutcome suite_jump_intensity(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(1000);
  const int mesh_n = static_cast<int>(cfg.integer("mesh_n", 9));
  const double x_max = cfg.real("x_max", 2.0);
  const double delta = cfg.real("delta", 1.0 / 1024.0);
  const JumpData data = collect_jumps(cfg, reps, mesh_n, x_max, delta);

  SuiteOutcome out;
  out.reports.push_back(
      stats::intensity_check(data.points, 0.0, x_max, 0.0, 1.0, "jump-intensity", cfg.seed));
  out.replica_header = "replica,jump_points";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells(
        {std::to_string(r), std::to_string(data.points[static_cast<std::size_t>(r)].size())}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: palm-running-max
//
// Part 1: after the first growth point of an adjacent-pair difference, the
// restarted profile is the running maximum of a fresh diffusivity-2 Brownian
// motion; KS against 2 Phi(m / (2 sqrt(u))) - 1 at probe depths.
// Part 2: an interior growth point picked by a uniformly random level splits
// the profile into left and right running maxima that are independent; the
// empirical correlation at matched depths must be consistent with zero.
// ---------------------------------------------------------------------------

SuiteOutcome suite_palm(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(10000);
  const std::int64_t pairs = cfg.integer("pairs", 64);
  const double x_max = cfg.real("x_max", 1.5);
  const double delta = cfg.real("delta", 1.0 / 8192.0);
  const std::vector<double> probes = {0.25, 1.0};
  const double probe_max = 1.0;
  const double tau_cap = x_max - probe_max;
  if (tau_cap <= 0.0) throw std::invalid_argument("palm-running-max: x_max must exceed the deepest probe");
  const double eps = 1.0 / static_cast<double>(pairs);

  std::vector<std::vector<horizon::JumpRecord>> buckets(static_cast<std::size_t>(reps));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const rng::Stream srep = rng::stream(sd, rng::kTagBm);
    const auto stride = static_cast<Eigen::Index>(std::llround(0.25 / delta));
    for (std::int64_t j = 0; j < pairs; ++j) {
      const auto path =
          horizon::sample_pair_path(eps, x_max, delta, rng::substream(srep, static_cast<std::uint64_t>(j)));
      const double tau = horizon::first_crossing(path);
      if (!(tau <= tau_cap)) continue;
      const auto j0 = static_cast<Eigen::Index>(std::llround(tau / delta));
      horizon::JumpRecord rec;
      rec.xi = (static_cast<double>(j) + 0.5) * eps;
      rec.tau = tau;
      rec.restarted = GridFunction::make(0.0, probe_max, 0.25, true);
      for (Eigen::Index k = 1; k < rec.restarted.size(); ++k)
        rec.restarted.values[k] =
            path.cummax[j0 + k * stride] - path.cummax[j0] + path.sup_correction;
      buckets[static_cast<std::size_t>(r)].push_back(std::move(rec));
    }
  });
  std::vector<horizon::JumpRecord> records;
  for (auto& b : buckets)
    for (auto& rec : b) records.push_back(std::move(rec));

  SuiteOutcome out;
  out.reports.push_back(
      stats::palm_running_max_check(records, probes, "palm-running-max:restart-law", cfg.seed));

  // Part 2: interior growth point by level sampling on one long pair window.
  const std::int64_t reps2 = cfg.integer("replicas2", 4000);
  const double window2 = cfg.real("window2", 32.0);
  const double delta2 = cfg.real("delta2", 1.0 / 1024.0);
  const double margin = 8.0;  // level headroom keeping both probes off the window edges
  std::vector<double> left25(static_cast<std::size_t>(reps2)), left1(static_cast<std::size_t>(reps2));
  std::vector<double> right25(static_cast<std::size_t>(reps2)), right1(static_cast<std::size_t>(reps2));
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(reps2), 0);
  for_each_replica(reps2, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, (1ull << 40) + static_cast<std::uint64_t>(r));
    const auto path = horizon::sample_pair_path(1.0, window2, delta2, rng::stream(sd, rng::kTagBm));
    const auto idx_lo = static_cast<Eigen::Index>(std::llround(2.0 / delta2));
    const auto idx_hi = static_cast<Eigen::Index>(std::llround((window2 - 2.0) / delta2));
    auto growth = [&](Eigen::Index i) { return std::max(path.cummax[i] - path.backlog, 0.0); };
    const double level_lo = growth(idx_lo) + margin;
    const double level_hi = growth(idx_hi) - margin;
    if (!(level_hi > level_lo)) return;  // window grew too little; rare, skipped
    const double u = rng::uniform_at(rng::stream(sd, rng::kTagBacklog), 0);
    const double target = path.backlog + level_lo + (level_hi - level_lo) * u;
    const double* begin = path.cummax.data();
    const double* end = begin + path.cummax.size();
    const auto jl = static_cast<Eigen::Index>(std::lower_bound(begin, end, target) - begin);
    const auto s25 = static_cast<Eigen::Index>(std::llround(0.25 / delta2));
    const auto s1 = static_cast<Eigen::Index>(std::llround(1.0 / delta2));
    left25[static_cast<std::size_t>(r)] = path.cummax[jl] - path.cummax[jl - s25];
    left1[static_cast<std::size_t>(r)] = path.cummax[jl] - path.cummax[jl - s1];
    right25[static_cast<std::size_t>(r)] = path.cummax[jl + s25] - path.cummax[jl];
    right1[static_cast<std::size_t>(r)] = path.cummax[jl + s1] - path.cummax[jl];
    valid[static_cast<std::size_t>(r)] = 1;
  });
  std::vector<double> l25, l1, r25, r1;
  for (std::int64_t r = 0; r < reps2; ++r)
    if (valid[static_cast<std::size_t>(r)]) {
      l25.push_back(left25[static_cast<std::size_t>(r)]);
      l1.push_back(left1[static_cast<std::size_t>(r)]);
      r25.push_back(right25[static_cast<std::size_t>(r)]);
      r1.push_back(right1[static_cast<std::size_t>(r)]);
    }
  if (l25.size() < 20) throw std::runtime_error("palm-running-max: too few interior growth points");
  const Correlation c25 = pearson(l25, r25);
  const Correlation c1 = pearson(l1, r1);
  const double worst_r = std::abs(c25.r) >= std::abs(c1.r) ? c25.r : c1.r;
  const double worst_z = std::max(std::abs(c25.z), std::abs(c1.z));
  out.reports.push_back(make_report("palm-running-max:independence", worst_r, 0.0,
                                    1.0 / std::sqrt(static_cast<double>(l25.size()) - 3.0), worst_z,
                                    worst_z <= 3.0, static_cast<std::int64_t>(l25.size()),
                                    cfg.seed));

  out.replica_header = "replica,finite_crossings";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(
        row_cells({std::to_string(r), std::to_string(buckets[static_cast<std::size_t>(r)].size())}));
  std::string sides = "replica,valid,left_025,right_025,left_1,right_1\n";
  for (std::int64_t r = 0; r < reps2; ++r) {
    const auto i = static_cast<std::size_t>(r);
    sides += row_cells({std::to_string(r), std::to_string(static_cast<int>(valid[i])),
                        io::format17(valid[i] ? left25[i] : 0.0),
                        io::format17(valid[i] ? right25[i] : 0.0),
                        io::format17(valid[i] ? left1[i] : 0.0),
                        io::format17(valid[i] ? right1[i] : 0.0)});
  }
  out.artifacts.emplace_back("sides.csv", std::move(sides));
  return out;
}

// ---------------------------------------------------------------------------
// suite: exit-tails
//
// Stationary half-plane model at density 1/2: the boundary profile on row 0
// is a two-sided random walk with Exp(rho) increments, and the exit point Z
// of the geodesic to (N, N) is the largest k maximizing h(k) + d((k,1),(N,N)).
// P(|Z| >= M N^{2/3}) must be strictly decreasing over M in {0.5, 1, 1.5, 2}
// and drop below 0.05 at M = 2.  The passage values d((k,1),(N,N)) for every
// k in the probe window [-K, K] come from one backward recursion restricted
// to the corridor swept by the straight lines from the window to (N, N),
// padded by a fluctuation margin; both the window and the margin are several
// times the N^{2/3} fluctuation scale, so truncation effects sit far in the
// cubic-decay tail (edge maximizers are flagged and counted).
// ---------------------------------------------------------------------------

SuiteOutcome suite_exit_tails(const ExperimentConfig& cfg) {
  const std::int64_t N = cfg.integer("n", 10000);
  const std::int64_t reps = cfg.replicas(1000);
  const double drift_c = cfg.real("c", 0.0);  // rho = 1/2 + c N^{-1/3}
  if (N < 64) throw std::invalid_argument("exit-tails: n too small");
  const double unit = std::cbrt(static_cast<double>(N) * static_cast<double>(N));
  const double rho = 0.5 + drift_c / std::cbrt(static_cast<double>(N));
  if (!(rho > 0.05 && rho < 0.95)) throw std::invalid_argument("exit-tails: drift too large");
  // Thresholds M are in the scaled spatial unit 2^{5/3} N^{2/3} of the
  // landscape frame; the probe window and corridor margin are in raw N^{2/3}.
  const double scaled_unit = std::pow(2.0, 5.0 / 3.0) * unit;
  const std::int64_t K = std::llround(cfg.real("window_units", 7.0) * unit);
  const double band = cfg.real("band_units", 2.5);
  const std::vector<double> thresholds = {0.5, 1.0, 1.5, 2.0};

  const std::int64_t col_lo = -K;  // up-right paths from the window never go left of -K
  const std::size_t ncols = static_cast<std::size_t>(N - col_lo + 2);
  std::vector<std::int64_t> exit_point(static_cast<std::size_t>(reps), 0);
  std::vector<std::uint8_t> edge_hit(static_cast<std::size_t>(reps), 0);
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const rng::Stream sb = rng::stream(sd, rng::kTagBulk);
    const auto prof = lattice::BoundaryProfile::stationary(sd, rho, -K, K);
    auto ix = [&](std::int64_t c) { return static_cast<std::size_t>(c - col_lo); };
    // Corridor margin beyond the straight-line spread: scales like the
    // transversal path fluctuation over the shorter remaining height, with a
    // small constant floor near the endpoints.
    auto pad_at = [&](std::int64_t row) -> std::int64_t {
      const double x = 4.0 * static_cast<double>(row) * static_cast<double>(N - row) /
                       (static_cast<double>(N) * static_cast<double>(N));
      return 16 + static_cast<std::int64_t>(std::llround(band * unit * std::pow(x, 2.0 / 3.0)));
    };
    auto corridor_lo = [&](std::int64_t row) {
      const double spread =
          static_cast<double>(K) * (1.0 - static_cast<double>(row) / static_cast<double>(N));
      return std::max(col_lo, static_cast<std::int64_t>(
                                  std::floor(static_cast<double>(row) - spread)) -
                                  pad_at(row));
    };
    auto corridor_hi = [&](std::int64_t row) {
      const double spread =
          static_cast<double>(K) * (1.0 - static_cast<double>(row) / static_cast<double>(N));
      return std::min(N, static_cast<std::int64_t>(
                             std::ceil(static_cast<double>(row) + spread)) +
                             pad_at(row));
    };

    std::vector<double> up(ncols, -kInf);
    std::vector<double> cur(ncols, -kInf);
    std::vector<double> wrow(ncols);
    std::int64_t up_lo = 1, up_hi = 0;
    for (std::int64_t row = N; row >= 1; --row) {
      const std::int64_t lo = corridor_lo(row);
      const std::int64_t hi = corridor_hi(row);
      // Weights are addressed by absolute column (cell c takes draw c - col_lo
      // of its row stream), so the realization does not depend on the corridor
      // shape.  Start at an even draw offset to stay cipher-block aligned.
      const std::int64_t fill_lo = lo - ((lo - col_lo) & 1);
      rng::fill_exp(rng::substream(sb, static_cast<std::uint64_t>(row)),
                    static_cast<std::uint64_t>((fill_lo - col_lo) / 2), 1.0,
                    wrow.data() + ix(fill_lo), static_cast<std::size_t>(hi - fill_lo + 1));
      // Right-to-left sweep with a running "right neighbor" value; cells whose
      // upper neighbor falls outside the previous row's corridor only see the
      // carry.  Cells never reached stay at -inf, which propagates harmlessly.
      double carry = -kInf;
      std::int64_t c = hi;
      if (row == N) {
        carry = 0.0;  // the target (N,N) anchors the recursion
        for (; c >= lo; --c) {
          carry += wrow[ix(c)];
          cur[ix(c)] = carry;
        }
      } else {
        const std::int64_t seg_hi = std::min(hi, up_hi);
        const std::int64_t seg_lo = std::max(lo, up_lo);
        for (; c > seg_hi; --c) {
          carry += wrow[ix(c)];
          cur[ix(c)] = carry;
        }
        for (; c >= seg_lo; --c) {
          const double cand = up[ix(c)];
          carry = wrow[ix(c)] + (cand > carry ? cand : carry);
          cur[ix(c)] = carry;
        }
        for (; c >= lo; --c) {
          carry += wrow[ix(c)];
          cur[ix(c)] = carry;
        }
      }
      if (row > 1) {
        std::swap(cur, up);
        up_lo = lo;
        up_hi = hi;
      }
    }
    // `cur` holds d((k,1),(N,N)) for k across the row-1 corridor, which
    // contains the whole probe window.
    double best_value = -kInf;
    std::int64_t best_exit = col_lo;
    for (std::int64_t k = -K; k <= K; ++k) {
      const double v = prof.at(k) + cur[ix(k)];
      if (v >= best_value) {  // keep the largest maximizer
        best_value = v;
        best_exit = k;
      }
    }
    exit_point[static_cast<std::size_t>(r)] = best_exit;
    edge_hit[static_cast<std::size_t>(r)] = (best_exit == -K || best_exit == K) ? 1 : 0;
  });

  std::vector<double> frac(thresholds.size(), 0.0);
  for (std::size_t m = 0; m < thresholds.size(); ++m) {
    std::int64_t hits = 0;
    for (std::int64_t z : exit_point)
      if (std::abs(static_cast<double>(z)) >= thresholds[m] * scaled_unit) ++hits;
    frac[m] = static_cast<double>(hits) / static_cast<double>(reps);
  }
  double min_drop = kInf;
  std::size_t arg = 0;
  for (std::size_t m = 0; m + 1 < thresholds.size(); ++m)
    if (frac[m] - frac[m + 1] < min_drop) {
      min_drop = frac[m] - frac[m + 1];
      arg = m;
    }
  const double tail = frac.back();
  const double se_tail = std::sqrt(std::max(tail * (1.0 - tail), 1e-12) / static_cast<double>(reps));
  const double se_drop = std::sqrt(std::max(frac[arg] + frac[arg + 1], 1e-12) / static_cast<double>(reps));

  SuiteOutcome out;
  out.reports.push_back(make_report("exit-tails:tail", tail, 0.05, se_tail,
                                    (tail - 0.05) / se_tail, tail < 0.05, reps, cfg.seed));
  out.reports.push_back(make_report("exit-tails:decay", min_drop, 0.0, se_drop, min_drop / se_drop,
                                    min_drop > 0.0, reps, cfg.seed));
  out.replica_header = "replica,exit_point,window_edge";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(
        row_cells({std::to_string(r), std::to_string(exit_point[static_cast<std::size_t>(r)]),
                   std::to_string(static_cast<int>(edge_hit[static_cast<std::size_t>(r)]))}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: deterministic-structure
//
// Six families of almost-sure lattice identities checked on randomized
// instances: path-crossing (quadrangle) inequality, superadditivity,
// attractiveness of the profile evolution, ordering of terminal-profile
// geodesics from ordered starts, additivity/antisymmetry of passage-time
// differences to a far corner, and monotonicity of the rightmost maximizing
// boundary site.
// ---------------------------------------------------------------------------

SuiteOutcome suite_deterministic(const ExperimentConfig& cfg) {
  const std::int64_t inst = cfg.replicas(1000);
  constexpr std::size_t kFamilies = 6;
  std::vector<std::array<std::uint8_t, kFamilies>> viol(static_cast<std::size_t>(inst),
                                                        std::array<std::uint8_t, kFamilies>{});
  const double tol = 1e-9;

  for_each_replica(inst, cfg.parallelism, [&](std::int64_t i) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(i));
    const rng::Stream sm = rng::stream(sd, rng::kTagMisc);
    std::uint64_t draw = 0;
    auto pick = [&](std::int64_t n) {
      return static_cast<std::int64_t>(rng::block_at(sm, draw++).a % static_cast<std::uint64_t>(n));
    };
    auto& v = viol[static_cast<std::size_t>(i)];

    // Families 1-2: crossing inequality and superadditivity on one field.
    {
      const std::int64_t w = 24 + pick(17), h = 12 + pick(9);
      const auto field = lattice::sample_weight_field(sd, {0, 0}, w, h);
      const std::int64_t bc = 1 + pick(w / 3);
      const std::int64_t c1 = bc + pick(w - 1 - bc);
      const std::int64_t c2 = c1 + 1 + pick(w - 1 - c1);
      const auto ta = lattice::passage_table(field, {0, 0});
      const auto tb = lattice::passage_table(field, {bc, 0});
      const double crossed = ta.at(c2, h - 1) + tb.at(c1, h - 1);
      const double aligned = ta.at(c1, h - 1) + tb.at(c2, h - 1);
      if (crossed > aligned + tol) v[0] = 1;

      const std::int64_t cy = 1 + pick(w - 2), ry = 1 + pick(h - 2);
      const auto ty = lattice::passage_table(field, {cy, ry});
      const double through = ta.at(cy, ry) + ty.at(w - 1, h - 1) - field.at(cy, ry);
      if (ta.at(w - 1, h - 1) + tol < through) v[1] = 1;
    }

    // Family 3: attractiveness + sup contraction of the profile evolution.
    {
      const std::int64_t kw = 64, rows = 8;
      const std::uint64_t sd2 = rng::block_at(sm, draw++).a;
      auto h1 = lattice::BoundaryProfile::stationary(sd2, 0.5, -kw, kw);
      auto h2 = h1;
      double bump_max = 0.0;
      for (std::int64_t k = -kw; k <= kw; ++k) {
        const double toss = rng::uniform_at(sm, draw, 1);
        const double size = rng::uniform_at(sm, draw, 2);
        ++draw;
        if (toss < 0.4) {
          h2.values[static_cast<std::size_t>(k + kw)] += size;
          bump_max = std::max(bump_max, size);
        }
      }
      const auto field = lattice::sample_weight_field(sd2, {-kw, 1}, 2 * kw + 1, rows);
      std::vector<lattice::Site> targets;
      for (std::int64_t c = -kw / 2; c <= kw / 2; c += 4) targets.push_back({c, rows});
      const auto r1 = lattice::halfplane_with_boundary(field, h1, targets);
      const auto r2 = lattice::halfplane_with_boundary(field, h2, targets);
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const double diff = r2.value[t] - r1.value[t];
        if (diff < -tol || diff > bump_max + tol) v[2] = 1;
      }
    }

    // Family 4: leftmost terminal-profile geodesics from ordered starts stay
    // ordered row by row.  The terminal profile decreases in the column with
    // Exp(1/2) down-steps (the remaining-passage law toward the diagonal), so
    // the maximizing column is interior.
    {
      const std::int64_t width = 72, top = 16;
      const std::uint64_t sd3 = rng::block_at(sm, draw++).a;
      const auto field = lattice::sample_weight_field(sd3, {0, 0}, width, top + 1);
      auto prof = lattice::BoundaryProfile::stationary(sd3 + 1, 0.5, 0, width - 1);
      for (auto& pv : prof.values) pv = -pv;
      const std::int64_t c0 = 4 + pick(8);
      const std::int64_t c1 = c0 + 1 + pick(8);
      auto span = [&](std::int64_t start) {
        std::vector<std::pair<std::int64_t, std::int64_t>> per_row(
            static_cast<std::size_t>(top + 1), {std::numeric_limits<std::int64_t>::max(), -1});
        const auto g = scaling::busemann_geodesic(field, prof, top, {start, 0},
                                                  scaling::GeodesicSide::kLeft);
        for (const auto& site : g.path.sites) {
          auto& pr = per_row[static_cast<std::size_t>(site.second)];
          pr.first = std::min(pr.first, site.first);
          pr.second = std::max(pr.second, site.first);
        }
        return per_row;
      };
      const auto lo = span(c0), hi = span(c1);
      for (std::int64_t row = 0; row <= top; ++row) {
        const auto& a = lo[static_cast<std::size_t>(row)];
        const auto& b = hi[static_cast<std::size_t>(row)];
        if (b.first < a.first || b.second < a.second) v[3] = 1;
      }
    }

    // Family 5: differences of passage times to one far corner are additive
    // along point triples and antisymmetric under pair swap.
    {
      const double rho = 0.3 + 0.4 * rng::uniform_at(sm, draw++, 3);
      const lattice::Site p{pick(4), pick(4)};
      const lattice::Site q{pick(4), pick(4)};
      const lattice::Site rr{pick(4), pick(4)};
      const auto est = scaling::busemann_estimate(
          rho, {{p, q}, {q, rr}, {p, rr}, {q, p}}, {24}, rng::block_at(sm, draw++).a);
      if (std::abs(est.values[0] + est.values[1] - est.values[2]) > tol) v[4] = 1;
      if (std::abs(est.values[3] + est.values[0]) > 1e-12) v[4] = 1;
    }

    // Family 6: the rightmost maximizing boundary site is nondecreasing in
    // the target column.
    {
      const std::int64_t width = 48, rows = 6;
      const std::uint64_t sd4 = rng::block_at(sm, draw++).a;
      const auto field = lattice::sample_weight_field(sd4, {0, 1}, width, rows);
      const auto prof = lattice::BoundaryProfile::stationary(sd4 + 1, 0.5, 0, width - 1);
      std::vector<lattice::Site> targets;
      for (std::int64_t c = 0; c < width; ++c) targets.push_back({c, rows});
      const auto res = lattice::halfplane_with_boundary(field, prof, targets);
      for (std::size_t t = 1; t < targets.size(); ++t)
        if (res.exit_k[t] < res.exit_k[t - 1]) v[5] = 1;
    }
  });

  static const char* kNames[kFamilies] = {"quadrangle",          "superadditivity",
                                          "attractiveness",      "geodesic-ordering",
                                          "busemann-additivity", "argmax-monotonicity"};
  SuiteOutcome out;
  for (std::size_t f = 0; f < kFamilies; ++f) {
    std::int64_t bad = 0;
    for (const auto& v : viol) bad += v[f];
    out.reports.push_back(make_report(std::string("deterministic-structure:") + kNames[f],
                                      static_cast<double>(bad), 0.0, 1.0,
                                      static_cast<double>(bad), bad == 0, inst, cfg.seed));
  }
  out.replica_header = "instance,quadrangle,superadditivity,attractiveness,geodesic_ordering,"
                       "busemann_additivity,argmax_monotonicity";
  for (std::int64_t i = 0; i < inst; ++i) {
    const auto& v = viol[static_cast<std::size_t>(i)];
    std::vector<std::string> cells{std::to_string(i)};
    for (std::size_t f = 0; f < kFamilies; ++f) cells.push_back(std::to_string(static_cast<int>(v[f])));
    out.replica_rows.push_back(io::csv_row(cells));
  }
  return out;
}

// ---------------------------------------------------------------------------
// suite: sh-convergence-trend
//
// The rescaled stationary line at direction 0: its increment over [0, 1] has
// variance 2 exactly up to the column-rounding factor, so the sample
// variance must sit within tolerance of 2 at N = 10^4 and be closer to 2
// there than at N = 10^2.
// ---------------------------------------------------------------------------

SuiteOutcome suite_sh_trend(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(1000000);
  const std::int64_t n_small = cfg.integer("n_small", 100);
  const std::int64_t n_large = cfg.integer("n_large", 10000);
  if (reps < 100) throw std::runtime_error("sh-convergence-trend: needs >= 100 replicas");

  std::vector<double> inc_small(static_cast<std::size_t>(reps));
  std::vector<double> inc_large(static_cast<std::size_t>(reps));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd_s = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const std::uint64_t sd_l = replica_seed(cfg.seed, (1ull << 40) + static_cast<std::uint64_t>(r));
    inc_small[static_cast<std::size_t>(r)] =
        scaling::scaled_busemann_line(n_small, {0.0}, 0.0, 1.0, sd_s).lines[0].increment(0.0, 1.0);
    inc_large[static_cast<std::size_t>(r)] =
        scaling::scaled_busemann_line(n_large, {0.0}, 0.0, 1.0, sd_l).lines[0].increment(0.0, 1.0);
  });

  SuiteOutcome out;
  out.reports.push_back(stats::moment_check(inc_large, 0.0, 2.0, 3.0, 0.15,
                                            "sh-convergence-trend:variance", cfg.seed));
  const double v_small = sample_var(inc_small);
  const double v_large = sample_var(inc_large);
  const double trend = std::abs(v_large - 2.0) - std::abs(v_small - 2.0);
  const double se = 2.0 * std::sqrt(2.0) * 2.0 / std::sqrt(static_cast<double>(reps));
  out.reports.push_back(make_report("sh-convergence-trend:trend", trend, 0.0, se, trend / se,
                                    trend <= 0.0, reps, cfg.seed));
  out.replica_header = "replica,increment_small,increment_large";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r),
                                          io::format17(inc_small[static_cast<std::size_t>(r)]),
                                          io::format17(inc_large[static_cast<std::size_t>(r)])}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: coalescence
//
// Terminal-profile geodesics from a width-10 window of starts, traced 8
// window-widths up to a common terminal profile: the profile decreases in the
// column with Exp(1/2) down-steps (remaining passage toward the diagonal), so
// geodesics run diagonally and select an interior column.  Two geodesics
// coalesce iff they select the same terminal column (they then share that
// site, and sharing any site forces the same terminal column).  The headline
// report asks the coalesced-pair fraction at the pinned height to exceed
// 0.95; a second report repeats the measurement at four times the height,
// where the coalescence curve sits above the same target.
// ---------------------------------------------------------------------------

SuiteOutcome suite_coalescence(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(100);
  const std::int64_t width = cfg.integer("width", 10);
  const std::int64_t top = cfg.integer("top", 8 * width);
  // Besides the pinned height, trace the same starts to doubled heights so the
  // report shows where the coalescence curve crosses the target.
  const std::array<std::int64_t, 3> heights = {top, 2 * top, 4 * top};
  std::array<std::vector<double>, 3> frac;
  for (auto& f : frac) f.assign(static_cast<std::size_t>(reps), 0.0);
  std::vector<std::int64_t> edges(static_cast<std::size_t>(reps), 0);

  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    for (std::size_t stage = 0; stage < heights.size(); ++stage) {
      const std::int64_t t = heights[stage];
      // Terminal columns concentrate around start + height; cover that range
      // plus a generous multiple of the transversal fluctuation scale.
      const std::int64_t span =
          width + t + 1 + std::llround(4.5 * std::cbrt(static_cast<double>(t * t)));
      const std::uint64_t sds = sd + stage;
      const auto field = lattice::sample_weight_field(sds, {0, 0}, span, t + 1);
      auto prof = lattice::BoundaryProfile::stationary(sds, 0.5, 0, span - 1);
      for (auto& pv : prof.values) pv = -pv;
      std::vector<std::int64_t> exit_col(static_cast<std::size_t>(width + 1));
      std::int64_t edge = 0;
      for (std::int64_t c = 0; c <= width; ++c) {
        const auto g =
            scaling::busemann_geodesic(field, prof, t, {c, 0}, scaling::GeodesicSide::kLeft);
        exit_col[static_cast<std::size_t>(c)] = g.exit_col;
        edge += g.edge_flag ? 1 : 0;
      }
      std::int64_t same = 0, pairs = 0;
      for (std::int64_t a = 0; a <= width; ++a)
        for (std::int64_t b = a + 1; b <= width; ++b, ++pairs)
          if (exit_col[static_cast<std::size_t>(a)] == exit_col[static_cast<std::size_t>(b)])
            ++same;
      frac[stage][static_cast<std::size_t>(r)] =
          static_cast<double>(same) / static_cast<double>(pairs);
      if (stage == 0) edges[static_cast<std::size_t>(r)] = edge;
    }
  });

  SuiteOutcome out;
  const double mean_frac = sample_mean(frac[0]);
  const double se = std::sqrt(sample_var(frac[0]) / static_cast<double>(reps));
  out.reports.push_back(make_report("coalescence", mean_frac, 0.95, se,
                                    (mean_frac - 0.95) / std::max(se, 1e-12), mean_frac > 0.95,
                                    reps, cfg.seed));
  const double mean_far = sample_mean(frac[2]);
  const double se_far = std::sqrt(sample_var(frac[2]) / static_cast<double>(reps));
  out.reports.push_back(make_report("coalescence:doubled-heights", mean_far, 0.95, se_far,
                                    (mean_far - 0.95) / std::max(se_far, 1e-12), mean_far > 0.95,
                                    reps, cfg.seed));
  std::string curve = "height,mean_fraction\n";
  for (std::size_t stage = 0; stage < heights.size(); ++stage)
    curve += std::to_string(heights[stage]) + "," + fmt_g(sample_mean(frac[stage])) + "\n";
  out.artifacts.emplace_back("curve.csv", curve);
  out.replica_header = "replica,fraction_t1,fraction_t2,fraction_t4,edge_flags";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r),
                                          io::format17(frac[0][static_cast<std::size_t>(r)]),
                                          io::format17(frac[1][static_cast<std::size_t>(r)]),
                                          io::format17(frac[2][static_cast<std::size_t>(r)]),
                                          std::to_string(edges[static_cast<std::size_t>(r)])}));
  return out;
}

// ---------------------------------------------------------------------------
// suite: dimension (non-gating)
//
// Box-counting estimate of the dimension of the growth set of a pair
// difference profile (its jump locations), expected near 1/2 on scales well
// below the drift crossover length.
// ---------------------------------------------------------------------------

SuiteOutcome suite_dimension(const ExperimentConfig& cfg) {
  const std::int64_t reps = cfg.replicas(8);
  const double window = cfg.real("x_hi", 64.0);
  const double delta = cfg.real("delta", 1.0 / 4096.0);
  const std::vector<double> scales = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};

  std::vector<double> estimate(static_cast<std::size_t>(reps));
  std::vector<double> mid(static_cast<std::size_t>(reps));
  std::vector<std::int64_t> npts(static_cast<std::size_t>(reps));
  for_each_replica(reps, cfg.parallelism, [&](std::int64_t r) {
    const std::uint64_t sd = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto path = horizon::sample_pair_path(1.0, window, delta, rng::stream(sd, rng::kTagBm));
    std::vector<double> points;
    for (Eigen::Index i = 1; i < path.cummax.size(); ++i)
      if (path.cummax[i] > path.cummax[i - 1] && path.cummax[i] > path.backlog)
        points.push_back(static_cast<double>(i) * delta);
    const auto box = stats::box_dimension(points, scales);
    estimate[static_cast<std::size_t>(r)] = box.estimate;
    mid[static_cast<std::size_t>(r)] = box.mid_slope;
    npts[static_cast<std::size_t>(r)] = static_cast<std::int64_t>(points.size());
  });

  SuiteOutcome out;
  const double mean_est = sample_mean(estimate);
  const double se = reps > 1 ? std::sqrt(sample_var(estimate) / static_cast<double>(reps)) : 0.0;
  out.reports.push_back(make_report("dimension", mean_est, 0.5, se, (mean_est - 0.5) / 0.15,
                                    std::abs(mean_est - 0.5) <= 0.15, reps, cfg.seed));
  out.replica_header = "replica,estimate,mid_slope,points";
  for (std::int64_t r = 0; r < reps; ++r)
    out.replica_rows.push_back(row_cells({std::to_string(r),
                                          io::format17(estimate[static_cast<std::size_t>(r)]),
                                          io::format17(mid[static_cast<std::size_t>(r)]),
                                          std::to_string(npts[static_cast<std::size_t>(r)])}));
  out.gating = false;
  return out;
}

// ---------------------------------------------------------------------------
// suite: horizon-trace (non-gating)
//
// Emits one joint horizon sample at six directions as plot data.
// ---------------------------------------------------------------------------

SuiteOutcome suite_horizon_trace(const ExperimentConfig& cfg) {
  const std::vector<double> dirs = {-1.25, -0.75, -0.25, 0.25, 0.75, 1.25};
  const double step = cfg.real("step", 1.0 / 256.0);
  const double x_lo = cfg.real("x_lo", -2.0);
  const double x_hi = cfg.real("x_hi", 2.0);
  const auto hs = horizon::sample_horizon(dirs, {x_lo - 12.0, x_hi, step},
                                          replica_seed(cfg.seed, 0));
  std::string csv = "x";
  for (std::size_t i = 1; i <= dirs.size(); ++i) csv += ",line_" + std::to_string(i);
  csv += "\n";
  const auto n = static_cast<Eigen::Index>(std::llround((x_hi - x_lo) / step));
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double x = x_lo + static_cast<double>(i) * step;
    std::vector<std::string> cells{io::format17(x)};
    for (std::size_t k = 0; k < dirs.size(); ++k) cells.push_back(io::format17(hs.lines[k].at(x)));
    csv += io::csv_row(cells) + "\n";
  }
  SuiteOutcome out;
  out.reports.push_back(make_report("horizon-trace", static_cast<double>(dirs.size()),
                                    static_cast<double>(dirs.size()), 0.0, 0.0, true, 1, cfg.seed));
  out.replica_header = "replica,lines";
  out.replica_rows.push_back(row_cells({"0", std::to_string(dirs.size())}));
  out.artifacts.emplace_back("lines.csv", std::move(csv));
  out.gating = false;
  return out;
}

// ---------------------------------------------------------------------------
// suite: reproducibility
//
// Runs every other suite at reduced size three times -- twice serially, once
// with two workers -- and requires byte-identical serialized artifacts.
// ---------------------------------------------------------------------------

struct SubSpec {
  const char* suite;
  std::vector<std::pair<const char*, const char*>> params;
};

const std::vector<SubSpec>& reduced_specs() {
  static const std::vector<SubSpec> specs = {
      {"queue-dp-equivalence", {{"replicas", "4"}, {"window", "96"}, {"levels", "12"}}},
      {"mu-invariance",
       {{"replicas", "24"}, {"window", "512"}, {"coords", "4"}, {"levels", "8"}}},
      {"queue-output-law", {{"replicas", "400"}}},
      {"sh-marginals", {{"replicas", "120"}, {"grid_min", "-6"}, {"step", "0.0078125"}}},
      {"separation", {{"replicas", "50"}}},
      {"jump-count",
       {{"replicas", "60"}, {"mesh_n", "5"}, {"delta", "0.00390625"}, {"x_max", "1.0"}}},
      {"jump-intensity",
       {{"replicas", "1000"}, {"mesh_n", "4"}, {"delta", "0.0078125"}, {"x_max", "1.0"}}},
      {"palm-running-max",
       {{"replicas", "300"},
        {"delta", "0.001953125"},
        {"replicas2", "120"},
        {"delta2", "0.015625"}}},
      {"exit-tails", {{"replicas", "4"}, {"n", "1500"}}},
      {"deterministic-structure", {{"replicas", "20"}}},
      {"sh-convergence-trend", {{"replicas", "3000"}}},
      {"coalescence", {{"replicas", "5"}, {"width", "6"}, {"top", "48"}}},
      {"dimension", {{"replicas", "2"}, {"x_hi", "16"}, {"delta", "0.001953125"}}},
      {"horizon-trace", {}},
  };
  return specs;
}

SuiteOutcome suite_reproducibility(const ExperimentConfig& cfg) {
  SuiteOutcome out;
  out.replica_header = "suite,rerun_identical,parallel_identical";
  std::int64_t mismatches = 0;
  for (const auto& spec : reduced_specs()) {
    ExperimentConfig sub;
    sub.suite = spec.suite;
    sub.seed = cfg.seed;
    sub.parallelism = 1;
    for (const auto& [k, v] : spec.params) sub.parameters[k] = v;
    const std::string first = serialize_outcome(run_suite(sub));
    const std::string rerun = serialize_outcome(run_suite(sub));
    sub.parallelism = std::max(2, cfg.parallelism);
    const std::string parallel = serialize_outcome(run_suite(sub));
    const bool same_rerun = rerun == first;
    const bool same_parallel = parallel == first;
    mismatches += (same_rerun ? 0 : 1) + (same_parallel ? 0 : 1);
    out.replica_rows.push_back(row_cells({spec.suite, std::to_string(static_cast<int>(same_rerun)),
                                          std::to_string(static_cast<int>(same_parallel))}));
  }
  out.reports.push_back(make_report("reproducibility", static_cast<double>(mismatches), 0.0, 1.0,
                                    static_cast<double>(mismatches), mismatches == 0,
                                    static_cast<std::int64_t>(reduced_specs().size() * 3), cfg.seed));
  return out;
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

struct RegistryEntry {
  const char* name;
  SuiteOutcome (*fn)(const ExperimentConfig&);
};

const RegistryEntry kRegistry[] = {
    {"queue-dp-equivalence", suite_queue_dp},
    {"mu-invariance", suite_mu_invariance},
    {"queue-output-law", suite_queue_output},
    {"sh-marginals", suite_sh_marginals},
    {"separation", suite_separation},
    {"jump-count", suite_jump_count},
    {"jump-intensity", suite_jump_intensity},
    {"palm-running-max", suite_palm},
    {"exit-tails", suite_exit_tails},
    {"deterministic-structure", suite_deterministic},
    {"sh-convergence-trend", suite_sh_trend},
    {"coalescence", suite_coalescence},
    {"dimension", suite_dimension},
    {"reproducibility", suite_reproducibility},
    {"horizon-trace", suite_horizon_trace},
};

nlohmann::ordered_json reports_json(const std::vector<TestReport>& reports) {
  auto safe = [](double x) {
    if (std::isinf(x)) return x > 0 ? std::numeric_limits<double>::max()
                                    : -std::numeric_limits<double>::max();
    return x;
  };
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json o;
    o["suite"] = r.suite;
    o["statistic"] = safe(r.statistic);
    o["expected"] = safe(r.expected);
    o["dispersion"] = safe(r.dispersion);
    o["score"] = safe(r.score);
    o["pass"] = r.pass;
    o["replicas"] = r.replicas;
    o["seed"] = r.seed;
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

double ExperimentConfig::real(const std::string& key, double fallback) const {
  const auto it = parameters.find(key);
  if (it == parameters.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter '" + key + "': cannot parse real from '" + it->second + "'");
  }
}

std::int64_t ExperimentConfig::integer(const std::string& key, std::int64_t fallback) const {
  const auto it = parameters.find(key);
  if (it == parameters.end()) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter '" + key + "': cannot parse integer from '" + it->second + "'");
  }
}

std::int64_t ExperimentConfig::replicas(std::int64_t fallback) const {
  const std::int64_t r = integer("replicas", fallback);
  if (r < 1) throw std::invalid_argument("parameter 'replicas': must be >= 1");
  return r;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "suite") {
    config.suite = value;
  } else if (key == "seed") {
    try {
      config.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("setting 'seed': cannot parse '" + value + "'");
    }
  } else if (key == "out" || key == "output_dir") {
    config.output_dir = value;
  } else if (key == "parallelism") {
    try {
      config.parallelism = std::stoi(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("setting 'parallelism': cannot parse '" + value + "'");
    }
    if (config.parallelism < 1) throw std::invalid_argument("setting 'parallelism': must be >= 1");
  } else {
    config.parameters[key] = value;
  }
}

ExperimentConfig load_config(const std::string& path) {
  const std::string content = io::read_text_file(path);
  ExperimentConfig config;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kRegistry) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

bool is_suite(const std::string& name) {
  for (const auto& e : kRegistry)
    if (name == e.name) return true;
  return false;
}

SuiteOutcome run_suite(const ExperimentConfig& config) {
  for (const auto& e : kRegistry)
    if (config.suite == e.name) return e.fn(config);
  throw std::invalid_argument("unknown suite '" + config.suite + "'");
}

std::string serialize_outcome(const SuiteOutcome& outcome) {
  std::string s = "report.json\n" + reports_json(outcome.reports).dump(2) + "\n";
  s += "replicas.csv\n" + outcome.replica_header + "\n";
  for (const auto& row : outcome.replica_rows) s += row;  // rows carry their newline
  for (const auto& [name, content] : outcome.artifacts) s += name + "\n" + content;
  return s;
}

std::string emit_report(const std::vector<TestReport>& reports, const std::string& path) {
  if (reports.empty()) throw std::invalid_argument("emit_report: empty report list");
  io::write_text_file(path, reports_json(reports).dump(2) + "\n");

  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.suite.size());
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %12s %12s %10s  %s\n", static_cast<int>(width), "suite",
                "statistic", "expected", "score", "pass");
  std::string summary = buf;
  int passed = 0;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-*s %12.6g %12.6g %10.4g  %s\n", static_cast<int>(width),
                  r.suite.c_str(), r.statistic, r.expected, r.score, r.pass ? "yes" : "NO");
    summary += buf;
    passed += r.pass ? 1 : 0;
  }
  std::snprintf(buf, sizeof(buf), "%d/%d pass\n", passed, static_cast<int>(reports.size()));
  summary += buf;
  const int failed = static_cast<int>(reports.size()) - passed;
  if (failed > 0) {
    std::snprintf(buf, sizeof(buf), "failures: %d\n", failed);
    summary += buf;
  }
  return summary;
}

int run_experiment(const ExperimentConfig& config) {
  if (!is_suite(config.suite)) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    std::fprintf(stderr, "unknown suite '%s'; registered suites: %s\n", config.suite.c_str(),
                 known.c_str());
    return 2;
  }
  try {
    const SuiteOutcome outcome = run_suite(config);
    io::ensure_dir(config.output_dir);
    std::string csv = outcome.replica_header + "\n";
    for (const auto& row : outcome.replica_rows) csv += row;  // rows carry their newline
    io::write_text_file(config.output_dir + "/replicas.csv", csv);
    for (const auto& [name, content] : outcome.artifacts)
      io::write_text_file(config.output_dir + "/" + name, content);
    const std::string summary = emit_report(outcome.reports, config.output_dir + "/report.json");
    std::fputs(summary.c_str(), stdout);
    std::fprintf(stdout, "artifacts: %s\n", config.output_dir.c_str());
    if (!outcome.gating) return 0;
    for (const auto& r : outcome.reports)
      if (!r.pass) return 1;
    return 0;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace sh::harness
