#pragma once
// Statistical verification machinery: KS and moment tests producing uniform
// reports, the closed-form separation probability, box-counting dimension
// estimates, and law checks for jump-record collections.

#include <sh/horizon.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sh::stats {

// Uniform result record for every verification suite.
struct TestReport {
  std::string suite;
  double statistic = 0.0;   // measured value (mean, KS D, ...)
  double expected = 0.0;    // target under the null
  double dispersion = 0.0;  // standard error or critical value
  double score = 0.0;       // z-score or p-value, per suite convention
  bool pass = false;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
};

// Standard normal CDF / quantile.
double normal_cdf(double x);
double normal_quantile(double p);

// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic p-value with the finite-sample effective count
// lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d.
double ks_pvalue(double d, std::size_t n);

// Critical KS statistic at significance `alpha` for n samples.
double ks_critical(double alpha, std::size_t n);

// KS report: statistic = D, expected = 0, dispersion = critical D at 1%,
// score = p-value, pass at p > 0.01.  Requires >= 20 samples.
TestReport ks_test(const std::vector<double>& samples,
                   const std::function<double(double)>& cdf,
                   const std::string& suite = "ks", std::uint64_t seed = 0);

// Moment report: statistic = sample mean, dispersion = its standard error,
// score = z.  Passes when |z| <= tol_mean_se and the sample variance is
// within tol_var_rel of target_var (relative).  Requires >= 100 samples.
TestReport moment_check(const std::vector<double>& samples, double target_mean,
                        double target_var, double tol_mean_se = 3.0,
                        double tol_var_rel = 0.10,
                        const std::string& suite = "moments",
                        std::uint64_t seed = 0);

// Probability that the ordered difference of two horizon lines with drift gap
// xi grows by at most z across a symmetric window of half-width x (the lines
// then stay within z of their origin offset on the whole window):
//   Phi((z - 2 xi x) / (2 sqrt(2x)))
//   + e^{xi z / 2} [ (1 + xi z / 2 + xi^2 x) Phi(-(z + 2 xi x) / (2 sqrt(2x)))
//                    - xi sqrt(x / pi) e^{-(z + 2 xi x)^2 / (16x)} ].
// The Gaussian factor is the standard normal density at (z + 2 xi x) /
// (2 sqrt(2x)) times sqrt(2 pi).  Requires x > 0, z >= 0, xi >= 0.
double separation_formula(double xi, double x, double z);

// Least-squares box-counting dimension of a point set in [0, L]:
// slope of log(occupied boxes) against log(1/scale).
struct BoxDimension {
  double estimate = 0.0;   // slope over all scales
  double std_error = 0.0;  // OLS standard error of the slope
  double mid_slope = 0.0;  // slope over the middle half of the scales
  std::vector<double> log_inv_scale;
  std::vector<double> log_count;
};

// Requires >= 50 points (a single repeated value is fine) and >= 4 distinct
// positive scales.
BoxDimension box_dimension(const std::vector<double>& points,
                           const std::vector<double>& scales);

// KS of restarted difference profiles at each probe depth u > 0 against the
// running-maximum law m -> 2 Phi(m / (2 sqrt(u))) - 1, Bonferroni-combined:
// score = min over probes of min(1, p * #probes), pass when score > 0.01.
// Records without a finite crossing or whose restarted window is shorter
// than max(u_probes) are skipped; throws std::runtime_error when fewer than
// 20 usable records remain.
TestReport palm_running_max_check(const std::vector<horizon::JumpRecord>& records,
                                  const std::vector<double>& u_probes,
                                  const std::string& suite = "palm-running-max",
                                  std::uint64_t seed = 0);

// Jump point process check over the rectangle (tau_lo, tau_hi] x [xi_lo, xi_hi]:
// the mean count per replica against 2 sqrt(2/pi) (xi_hi - xi_lo)
// (sqrt(tau_hi) - sqrt(tau_lo)), plus an 8-bin tau histogram against the
// integrated intensity, each within 3 standard errors.  statistic = mean
// count, score = largest |z| over the mean and the bins.
TestReport intensity_check(const std::vector<std::vector<std::pair<double, double>>>& point_sets,
                           double tau_lo, double tau_hi, double xi_lo, double xi_hi,
                           const std::string& suite = "jump-intensity",
                           std::uint64_t seed = 0);

}  // namespace sh::stats
