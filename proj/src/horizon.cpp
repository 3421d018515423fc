#include "sh/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sh::horizon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Expected gap between the running max of a Brownian path and the max of its
// values on a step-delta grid is 0.5826 * diffusivity * sqrt(delta).
constexpr double kGridSupGap = 0.5826;

void check_common_anchored(const GridFunction& f, const GridFunction& g, const char* who) {
  if (!f.anchored || !g.anchored) {
    throw std::invalid_argument(std::string(who) + ": inputs must be anchored");
  }
  if (f.size() != g.size() || std::abs(f.grid_min - g.grid_min) > 1e-12 ||
      std::abs(f.step - g.step) > 1e-15) {
    throw std::invalid_argument(std::string(who) + ": inputs must share one grid");
  }
}
}  // namespace

GridFunction sample_two_sided_bm(double drift, double diffusivity, const GridSpec& grid,
                                 const rng::Stream& s) {
  if (!(diffusivity >= 0.0)) {
    throw std::invalid_argument("sample_two_sided_bm: diffusivity must be >= 0");
  }
  GridFunction g = GridFunction::make(grid.min, grid.max, grid.step, /*anchored=*/true);
  const Eigen::Index n = g.size();
  const Eigen::Index z = g.zero_index;
  const double mu = drift * grid.step;
  const double sd = diffusivity * std::sqrt(grid.step);
  const Eigen::Index nr = n - 1 - z;
  const Eigen::Index nl = z;
  Eigen::ArrayXd buf(std::max(nr, nl));
  if (nr > 0) {
    rng::fill_normal(s, 0, buf.data(), nr, /*slot=*/0);
    for (Eigen::Index j = 0; j < nr; ++j) {
      g.values[z + 1 + j] = g.values[z + j] + mu + sd * buf[j];
    }
  }
  if (nl > 0) {
    rng::fill_normal(s, 0, buf.data(), nl, /*slot=*/1);
    for (Eigen::Index j = 0; j < nl; ++j) {
      g.values[z - 1 - j] = g.values[z - j] - (mu + sd * buf[j]);
    }
  }
  return g;
}

GridFunction sample_two_sided_bm(double drift, double diffusivity, const GridSpec& grid,
                                 std::uint64_t seed) {
  return sample_two_sided_bm(drift, diffusivity, grid, rng::stream(seed, rng::kTagBm));
}

GridFunction phi(const GridFunction& f, const GridFunction& g) {
  check_common_anchored(f, g, "phi");
  const Eigen::Index n = f.size();
  const Eigen::Index z = f.zero_index;
  const Eigen::ArrayXd h = f.values - g.values;  // h(0) = 0

  GridFunction out = f;
  out.edge_flag = f.edge_flag || g.edge_flag;

  // Prefix running max of -h, i.e. M(y) = max_{x <= y} (g - f)(x), truncated
  // at the window edge; track the rightmost index attaining M(0).
  Eigen::ArrayXd neg_max(n);
  Eigen::Index arg_at_zero = 0;
  {
    double m = -h[0];
    Eigen::Index arg = 0;
    neg_max[0] = m;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (-h[i] >= m) {
        m = -h[i];
        arg = i;
      }
      neg_max[i] = m;
      if (i == z) arg_at_zero = arg;
    }
    if (z == 0) arg_at_zero = 0;
  }
  if (arg_at_zero == 0 && z > 0) out.edge_flag = true;

  // y >= 0 branch: f(y) + [ W_0 + min_{0<=x<=y} h(x) ]^-  with W_0 = M(0).
  const double w0 = neg_max[z];
  double run_min = h[z];
  for (Eigen::Index i = z; i < n; ++i) {
    run_min = std::min(run_min, h[i]);
    const double a = w0 + run_min;
    out.values[i] = f.values[i] + std::max(-a, 0.0);
  }
  // y < 0 branch: f(y) - [ W_y + min_{y<x<=0} (h(x) - h(y)) ]^-
  // with W_y = max_{x<=y} [h(y) - h(x)] = h(y) + neg_max(y).
  double suf_min = h[z];  // min over (y, 0] maintained while y moves left
  for (Eigen::Index i = z - 1; i >= 0; --i) {
    const double wy = h[i] + neg_max[i];
    const double a = wy + (suf_min - h[i]);
    out.values[i] = f.values[i] - std::max(-a, 0.0);
    suf_min = std::min(suf_min, h[i]);
  }
  return out;
}

std::vector<GridFunction> phi_k(const std::vector<GridFunction>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("phi_k: need at least one input");
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    check_common_anchored(inputs[0], inputs[i], "phi_k");
  }
  if (inputs.size() == 1) return inputs;
  std::vector<GridFunction> tail(inputs.begin() + 1, inputs.end());
  const std::vector<GridFunction> prev = phi_k(tail);
  std::vector<GridFunction> out;
  out.reserve(inputs.size());
  out.push_back(inputs[0]);
  for (std::size_t j = 0; j < prev.size(); ++j) out.push_back(phi(inputs[0], prev[j]));
  return out;
}

HorizonSample sample_horizon(const std::vector<double>& directions, const GridSpec& grid,
                             std::uint64_t seed) {
  if (directions.empty()) throw std::invalid_argument("sample_horizon: no directions");
  for (std::size_t i = 1; i < directions.size(); ++i) {
    if (!(directions[i] > directions[i - 1])) {
      throw std::invalid_argument("sample_horizon: directions must be strictly increasing");
    }
  }
  const rng::Stream base = rng::stream(seed, rng::kTagBm);
  std::vector<GridFunction> motions;
  motions.reserve(directions.size());
  for (std::size_t i = 0; i < directions.size(); ++i) {
    motions.push_back(sample_two_sided_bm(2.0 * directions[i], std::sqrt(2.0), grid,
                                          rng::substream(base, i)));
  }
  HorizonSample s;
  s.directions = directions;
  s.lines = phi_k(motions);
  s.seed = seed;
  return s;
}

GridFunction difference_line(const HorizonSample& sample, std::size_t i) {
  if (i < 2 || i > sample.lines.size()) {
    throw std::out_of_range("difference_process: index i must satisfy 2 <= i <= k");
  }
  GridFunction h = sample.lines[i - 1];
  h.values -= sample.lines[i - 2].values;
  h.edge_flag = sample.lines[i - 1].edge_flag || sample.lines[i - 2].edge_flag;
  return h;
}

JumpRecord difference_process(const HorizonSample& sample, std::size_t i, double threshold) {
  const GridFunction h = difference_line(sample, i);
  JumpRecord rec;
  rec.xi = sample.directions[i - 1];
  for (Eigen::Index j = h.zero_index + 1; j < h.size(); ++j) {
    if (h.values[j] > threshold) {
      rec.tau = h.x_at(j);
      const Eigen::Index m = h.size() - j;
      if (m >= 2) {  // a crossing at the window edge leaves no profile window
        rec.restarted = GridFunction::make(0.0, static_cast<double>(m - 1) * h.step, h.step, true);
        for (Eigen::Index u = 0; u < m; ++u) {
          rec.restarted.values[u] = h.values[j + u] - h.values[j];
        }
        rec.restarted.edge_flag = h.edge_flag;
      }
      break;
    }
  }
  return rec;
}

PairPath sample_pair_path(double gap, double x_max, double delta, const rng::Stream& s) {
  if (!(gap > 0.0)) throw std::invalid_argument("sample_pair_path: gap must be positive");
  if (!(delta > 0.0 && x_max >= delta)) {
    throw std::invalid_argument("sample_pair_path: need 0 < delta <= x_max");
  }
  const auto n = static_cast<Eigen::Index>(std::llround(x_max / delta));
  PairPath p;
  p.gap = gap;
  p.delta = delta;
  const double diffusivity = 2.0;
  p.sup_correction = kGridSupGap * diffusivity * std::sqrt(delta);
  p.backlog = rng::exp_at(s, 0, gap);
  p.cum.resize(n + 1);
  p.cummax.resize(n + 1);
  Eigen::ArrayXd buf(n);
  rng::fill_normal(s, 8, buf.data(), n);  // indices 0..7 reserved for scalars
  const double mu = 2.0 * gap * delta;
  const double sd = diffusivity * std::sqrt(delta);
  double c = 0.0, m = 0.0;
  p.cum[0] = 0.0;
  p.cummax[0] = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    c += mu + sd * buf[j];
    m = std::max(m, c);
    p.cum[j + 1] = c;
    p.cummax[j + 1] = m;
  }
  return p;
}

double first_crossing(const PairPath& p, double threshold) {
  const double level = p.backlog + threshold - p.sup_correction;
  for (Eigen::Index j = 1; j < p.cummax.size(); ++j) {
    if (p.cummax[j] > level) return static_cast<double>(j) * p.delta;
  }
  return kInf;
}

GridFunction restarted_profile(const PairPath& p, Eigen::Index j0) {
  if (j0 < 0 || j0 >= p.cummax.size() - 1) {
    throw std::out_of_range("restarted_profile: index outside the path");
  }
  const Eigen::Index m = p.cummax.size() - j0;
  GridFunction r = GridFunction::make(0.0, static_cast<double>(m - 1) * p.delta, p.delta, true);
  for (Eigen::Index u = 0; u < m; ++u) r.values[u] = p.cummax[j0 + u] - p.cummax[j0];
  return r;
}

MeshJumps sample_mesh_jumps(double xi_lo, double xi_hi, int mesh_n, double x_max, double delta,
                            const rng::Stream& replica_stream, bool with_coarse,
                            bool capture_restarted) {
  if (mesh_n < 1 || mesh_n > 24) throw std::invalid_argument("sample_mesh_jumps: bad mesh");
  if (!(xi_hi > xi_lo)) throw std::invalid_argument("sample_mesh_jumps: empty direction range");
  const std::int64_t npairs = std::int64_t{1} << mesh_n;
  const std::int64_t nlines = npairs + 1;
  const double gap = (xi_hi - xi_lo) / static_cast<double>(npairs);
  const auto n = static_cast<Eigen::Index>(std::llround(x_max / delta));

  MeshJumps out;
  const double corr = kGridSupGap * 2.0 * std::sqrt(delta);
  auto scan = [&](const Eigen::ArrayXd& diff, double q, double xi,
                  std::vector<JumpRecord>& dest) {
    JumpRecord rec;
    rec.xi = xi;
    double m = 0.0;
    Eigen::Index hit = -1;
    for (Eigen::Index j = 1; j <= n; ++j) {
      m = std::max(m, diff[j]);
      if (m + corr > q + 1e-9) {
        hit = j;
        rec.tau = static_cast<double>(j) * delta;
        break;
      }
    }
    if (hit >= 0 && capture_restarted && n - hit >= 1) {
      const Eigen::Index mlen = n + 1 - hit;
      rec.restarted = GridFunction::make(0.0, static_cast<double>(mlen - 1) * delta, delta, true);
      double rm = diff[hit];
      const double base = rm;
      for (Eigen::Index u = 0; u < mlen; ++u) {
        rm = std::max(rm, diff[hit + u]);
        rec.restarted.values[u] = rm - base;
      }
    }
    dest.push_back(std::move(rec));
  };

  // Independent per-line driftless motions; the driver of a pair of lines at
  // direction gap g is their difference plus the deterministic drift 2*g*x.
  // This preserves the joint law across pairs (adjacent drivers share a line
  // and are anticorrelated) and makes the coarse mesh an exact restriction.
  Eigen::ArrayXd buf(n), prev2(n + 1), prev1(n + 1), cur(n + 1), diff(n + 1);
  const double sd = std::sqrt(2.0) * std::sqrt(delta);
  const double dstep_fine = 2.0 * gap * delta;
  for (std::int64_t j = 0; j < nlines; ++j) {
    const rng::Stream sl = rng::substream(replica_stream, static_cast<std::uint64_t>(j));
    rng::fill_normal(sl, 8, buf.data(), n);  // indices 0..7 reserved for scalars
    std::swap(prev2, prev1);
    std::swap(prev1, cur);
    cur[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cur[i + 1] = cur[i] + sd * buf[i];
    if (j >= 1) {
      const std::int64_t p = j - 1;
      const rng::Stream sq =
          rng::substream(replica_stream, static_cast<std::uint64_t>(nlines + p));
      const double q = rng::exp_at(sq, 0, gap);
      double drift = 0.0;
      for (Eigen::Index i = 0; i <= n; ++i) {
        diff[i] = cur[i] - prev1[i] + drift;
        drift += dstep_fine;
      }
      scan(diff, q, xi_lo + static_cast<double>(p + 1) * gap, out.fine);
    }
    if (with_coarse && j >= 2 && j % 2 == 0) {
      const std::int64_t c = j / 2 - 1;
      const rng::Stream sq =
          rng::substream(replica_stream, static_cast<std::uint64_t>(nlines + npairs + c));
      const double q = rng::exp_at(sq, 0, 2.0 * gap);
      double drift = 0.0;
      for (Eigen::Index i = 0; i <= n; ++i) {
        diff[i] = cur[i] - prev2[i] + drift;
        drift += 2.0 * dstep_fine;
      }
      scan(diff, q, xi_lo + static_cast<double>(2 * c + 2) * gap, out.coarse);
    }
  }
  return out;
}

std::vector<std::vector<JumpRecord>> jump_point_process(double xi_lo, double xi_hi, int mesh_n,
                                                        double x_max, double delta,
                                                        std::uint64_t seed,
                                                        std::int64_t replicas) {
  if (mesh_n < 6) throw std::invalid_argument("jump_point_process: mesh exponent must be >= 6");
  std::vector<std::vector<JumpRecord>> out;
  out.reserve(static_cast<std::size_t>(replicas));
  if (xi_hi == xi_lo) {  // degenerate direction interval carries no points
    out.assign(static_cast<std::size_t>(replicas), {});
    return out;
  }
  const rng::Stream base = rng::stream(seed, rng::kTagBm);
  for (std::int64_t r = 0; r < replicas; ++r) {
    MeshJumps mj = sample_mesh_jumps(xi_lo, xi_hi, mesh_n, x_max, delta,
                                     rng::substream(base, static_cast<std::uint64_t>(r)),
                                     /*with_coarse=*/false, /*capture_restarted=*/false);
    std::vector<JumpRecord> pts;
    for (auto& rec : mj.fine) {
      if (rec.finite()) pts.push_back(std::move(rec));
    }
    out.push_back(std::move(pts));
  }
  return out;
}

}  // namespace sh::horizon
