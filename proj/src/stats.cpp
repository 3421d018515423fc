#include "sh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace sh::stats {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), the asymptotic
// two-sided KS tail probability.
double ks_tail(double lambda) {
  if (lambda < 0.02) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    const double term = std::exp(-2.0 * lambda * lambda * double(k) * double(k));
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

double effective_count(std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return rn + 0.12 + 0.11 / rn;
}

void mean_and_var(const std::vector<double>& samples, double& mean, double& var) {
  const auto n = static_cast<double>(samples.size());
  double s = 0.0;
  for (const double x : samples) s += x;
  mean = s / n;
  double ss = 0.0;
  for (const double x : samples) ss += (x - mean) * (x - mean);
  var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie strictly in (0,1)");
  }
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    if (f < -1e-12 || f > 1.0 + 1e-12) {
      throw std::invalid_argument("ks_statistic: cdf value outside [0,1]");
    }
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  if (n == 0) throw std::invalid_argument("ks_pvalue: n must be positive");
  return ks_tail(effective_count(n) * d);
}

double ks_critical(double alpha, std::size_t n) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("ks_critical: alpha must lie strictly in (0,1)");
  }
  double lo = 0.02, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ks_tail(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / effective_count(n);
}

TestReport ks_test(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf, const std::string& suite,
                   std::uint64_t seed) {
  if (samples.size() < 20) {
    throw std::invalid_argument("ks_test: need at least 20 samples");
  }
  TestReport r;
  r.suite = suite;
  r.seed = seed;
  r.replicas = static_cast<std::int64_t>(samples.size());
  r.statistic = ks_statistic(samples, cdf);
  r.expected = 0.0;
  r.dispersion = ks_critical(0.01, samples.size());
  r.score = ks_pvalue(r.statistic, samples.size());
  r.pass = r.score > 0.01;
  return r;
}

TestReport moment_check(const std::vector<double>& samples, double target_mean,
                        double target_var, double tol_mean_se, double tol_var_rel,
                        const std::string& suite, std::uint64_t seed) {
  if (samples.size() < 100) {
    throw std::invalid_argument("moment_check: need at least 100 samples");
  }
  double mean = 0.0, var = 0.0;
  mean_and_var(samples, mean, var);
  const double se = std::sqrt(var / static_cast<double>(samples.size()));

  TestReport r;
  r.suite = suite;
  r.seed = seed;
  r.replicas = static_cast<std::int64_t>(samples.size());
  r.statistic = mean;
  r.expected = target_mean;
  r.dispersion = se;
  if (se > 0.0) {
    r.score = (mean - target_mean) / se;
  } else {
    r.score = mean == target_mean ? 0.0 : std::numeric_limits<double>::infinity();
  }
  bool var_ok;
  if (target_var == 0.0) {
    var_ok = var <= 1e-18 * std::max(1.0, mean * mean);
  } else {
    var_ok = std::abs(var / target_var - 1.0) <= tol_var_rel;
  }
  r.pass = std::abs(r.score) <= tol_mean_se && var_ok;
  return r;
}

double separation_formula(double xi, double x, double z) {
  if (!(x > 0.0) || z < 0.0 || xi < 0.0) {
    throw std::invalid_argument("separation_formula: need x > 0, z >= 0, xi >= 0");
  }
  // Derivation sketch: the nondecreasing difference D of the two motions over
  // [-x, x] equals (S - Q)^+ with S the running maximum of a Brownian motion
  // with drift xi and variance rate 4 over a window of length 2x, and Q an
  // independent Exp(xi / 2) backlog.  Integrating the running-maximum law
  // against the backlog density gives the closed form below; it was
  // cross-checked against direct numeric integration and Monte Carlo.
  const double s = 2.0 * std::sqrt(2.0 * x);
  const double a = (z + 2.0 * xi * x) / s;
  const double first = normal_cdf((z - 2.0 * xi * x) / s);
  const double tail = normal_cdf(-a);
  const double gauss = std::exp(-0.5 * a * a);
  const double second = std::exp(0.5 * xi * z) *
                        ((1.0 + 0.5 * xi * z + xi * xi * x) * tail -
                         xi * std::sqrt(x / kPi) * gauss);
  return first + second;
}

BoxDimension box_dimension(const std::vector<double>& points,
                           const std::vector<double>& scales) {
  if (points.size() < 50) {
    throw std::invalid_argument("box_dimension: need at least 50 points");
  }
  std::vector<double> sc = scales;
  std::sort(sc.begin(), sc.end(), std::greater<>());
  if (sc.size() < 4) throw std::invalid_argument("box_dimension: need at least 4 scales");
  for (std::size_t i = 0; i < sc.size(); ++i) {
    if (!(sc[i] > 0.0) || !std::isfinite(sc[i]) ||
        (i > 0 && !(sc[i] < sc[i - 1]))) {
      throw std::invalid_argument("box_dimension: scales must be distinct and positive");
    }
  }
  for (const double p : points) {
    if (!std::isfinite(p)) throw std::invalid_argument("box_dimension: non-finite point");
  }

  BoxDimension out;
  out.log_inv_scale.reserve(sc.size());
  out.log_count.reserve(sc.size());
  std::unordered_set<long long> boxes;
  for (const double e : sc) {
    boxes.clear();
    for (const double p : points) {
      boxes.insert(static_cast<long long>(std::floor(p / e)));
    }
    out.log_inv_scale.push_back(std::log(1.0 / e));
    out.log_count.push_back(std::log(static_cast<double>(boxes.size())));
  }

  const auto slope_over = [&](std::size_t lo, std::size_t hi, double* se) {
    const auto m = static_cast<double>(hi - lo);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      mx += out.log_inv_scale[i];
      my += out.log_count[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double dx = out.log_inv_scale[i] - mx;
      sxx += dx * dx;
      sxy += dx * (out.log_count[i] - my);
    }
    const double b = sxy / sxx;
    if (se != nullptr) {
      double ss = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const double r = out.log_count[i] - my - b * (out.log_inv_scale[i] - mx);
        ss += r * r;
      }
      *se = hi - lo > 2 ? std::sqrt(ss / (m - 2.0) / sxx) : 0.0;
    }
    return b;
  };

  out.estimate = slope_over(0, sc.size(), &out.std_error);
  const std::size_t q = sc.size() / 4;
  out.mid_slope = slope_over(q, sc.size() - q, nullptr);
  return out;
}

TestReport palm_running_max_check(const std::vector<horizon::JumpRecord>& records,
                                  const std::vector<double>& u_probes,
                                  const std::string& suite, std::uint64_t seed) {
  if (u_probes.empty()) {
    throw std::invalid_argument("palm_running_max_check: no probe depths");
  }
  double u_max = 0.0;
  for (const double u : u_probes) {
    if (!(u > 0.0)) {
      throw std::invalid_argument("palm_running_max_check: probe depths must be positive");
    }
    u_max = std::max(u_max, u);
  }

  std::vector<const GridFunction*> usable;
  for (const auto& rec : records) {
    if (!rec.finite() || rec.restarted.size() < 2) continue;
    if (rec.restarted.grid_max < u_max - 1e-12) continue;
    usable.push_back(&rec.restarted);
  }
  if (usable.size() < 20) {
    throw std::runtime_error("palm_running_max_check: fewer than 20 usable records");
  }

  const double m_tests = static_cast<double>(u_probes.size());
  TestReport r;
  r.suite = suite;
  r.seed = seed;
  r.replicas = static_cast<std::int64_t>(usable.size());
  r.expected = 0.0;
  r.score = 1.0;
  r.pass = true;
  std::vector<double> samples(usable.size());
  for (const double u : u_probes) {
    for (std::size_t i = 0; i < usable.size(); ++i) samples[i] = usable[i]->at(u);
    const double root = 2.0 * std::sqrt(u);
    const auto cdf = [root](double m) {
      return m <= 0.0 ? 0.0 : 2.0 * normal_cdf(m / root) - 1.0;
    };
    const double d = ks_statistic(samples, cdf);
    const double adj = std::min(1.0, ks_pvalue(d, samples.size()) * m_tests);
    if (d > r.statistic) r.statistic = d;
    r.score = std::min(r.score, adj);
  }
  r.dispersion = ks_critical(0.01 / m_tests, usable.size());
  r.pass = r.score > 0.01;
  return r;
}

TestReport intensity_check(
    const std::vector<std::vector<std::pair<double, double>>>& point_sets, double tau_lo,
    double tau_hi, double xi_lo, double xi_hi, const std::string& suite,
    std::uint64_t seed) {
  if (point_sets.size() < 1000) {
    throw std::invalid_argument("intensity_check: need at least 1000 replicas");
  }
  if (!(tau_hi >= tau_lo) || tau_lo < 0.0 || !(xi_hi >= xi_lo)) {
    throw std::invalid_argument("intensity_check: malformed rectangle");
  }
  const double reps = static_cast<double>(point_sets.size());
  constexpr int kBins = 8;
  const double bin_w = (tau_hi - tau_lo) / kBins;

  // Per-replica total count and per-bin counts.
  std::vector<double> totals(point_sets.size(), 0.0);
  std::vector<std::vector<double>> bins(kBins, std::vector<double>(point_sets.size(), 0.0));
  for (std::size_t rsp = 0; rsp < point_sets.size(); ++rsp) {
    for (const auto& [tau, xi] : point_sets[rsp]) {
      if (!(tau > tau_lo) || !(tau <= tau_hi)) continue;
      if (!(xi > xi_lo) || !(xi <= xi_hi)) continue;
      totals[rsp] += 1.0;
      if (bin_w > 0.0) {
        auto b = static_cast<int>((tau - tau_lo) / bin_w);
        if (b >= kBins) b = kBins - 1;
        bins[static_cast<std::size_t>(b)][rsp] += 1.0;
      }
    }
  }

  const double front = 2.0 * std::sqrt(2.0 / kPi) * (xi_hi - xi_lo);
  const auto z_against = [&](const std::vector<double>& counts, double expected) {
    double mean = 0.0, var = 0.0;
    mean_and_var(counts, mean, var);
    const double se = std::sqrt(var / reps);
    if (se > 0.0) return std::make_pair((mean - expected) / se, mean);
    return std::make_pair(mean == expected ? 0.0 : std::numeric_limits<double>::infinity(),
                          mean);
  };

  TestReport r;
  r.suite = suite;
  r.seed = seed;
  r.replicas = static_cast<std::int64_t>(point_sets.size());
  r.expected = front * (std::sqrt(tau_hi) - std::sqrt(tau_lo));
  const auto [z_mean, mean] = z_against(totals, r.expected);
  r.statistic = mean;
  {
    double m2 = 0.0, v2 = 0.0;
    mean_and_var(totals, m2, v2);
    r.dispersion = std::sqrt(v2 / reps);
  }
  double worst = std::abs(z_mean);
  if (bin_w > 0.0) {
    for (int b = 0; b < kBins; ++b) {
      const double lo = tau_lo + b * bin_w;
      const double hi = tau_lo + (b + 1) * bin_w;
      const double expect_bin = front * (std::sqrt(hi) - std::sqrt(lo));
      const auto [zb, mb] = z_against(bins[static_cast<std::size_t>(b)], expect_bin);
      (void)mb;
      worst = std::max(worst, std::abs(zb));
    }
  }
  r.score = worst;
  r.pass = worst <= 3.0;
  return r;
}

}  // namespace sh::stats
