#include "sh/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sh::lattice {

namespace {
constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

WeightField sample_weight_field(std::uint64_t seed, Site origin, std::int64_t width,
                                std::int64_t height) {
  if (width < 1 || height < 1) throw std::invalid_argument("sample_weight_field: empty field");
  WeightField f;
  f.seed = seed;
  f.origin_col = origin.first;
  f.origin_row = origin.second;
  f.weights.resize(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  const rng::Stream s = rng::stream(seed, rng::kTagBulk);
  for (std::int64_t r = 0; r < height; ++r) {
    for (std::int64_t c = 0; c < width; ++c) {
      f.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rng::exp_at_site(s, origin.first + c, origin.second + r, 1.0);
    }
  }
  return f;
}

PassageTable passage_table(const WeightField& field, Site source) {
  if (!field.contains(source.first, source.second)) {
    throw std::invalid_argument("passage_table: source outside the weight field");
  }
  PassageTable t;
  t.origin_col = field.origin_col;
  t.origin_row = field.origin_row;
  t.source = source;
  const auto h = static_cast<Eigen::Index>(field.height());
  const auto w = static_cast<Eigen::Index>(field.width());
  t.d = Eigen::ArrayXXd::Constant(h, w, kAbsent);
  const auto sr = static_cast<Eigen::Index>(source.second - field.origin_row);
  const auto sc = static_cast<Eigen::Index>(source.first - field.origin_col);
  t.d(sr, sc) = field.weights(sr, sc);
  for (Eigen::Index c = sc + 1; c < w; ++c) t.d(sr, c) = t.d(sr, c - 1) + field.weights(sr, c);
  for (Eigen::Index r = sr + 1; r < h; ++r) {
    t.d(r, sc) = t.d(r - 1, sc) + field.weights(r, sc);
    for (Eigen::Index c = sc + 1; c < w; ++c) {
      t.d(r, c) = field.weights(r, c) + std::max(t.d(r, c - 1), t.d(r - 1, c));
    }
  }
  return t;
}

GeodesicPath trace_geodesic(const PassageTable& table, Site target) {
  if (!table.has(target.first, target.second)) {
    throw std::invalid_argument("trace_geodesic: target has no passage value");
  }
  GeodesicPath path;
  std::int64_t col = target.first;
  std::int64_t row = target.second;
  path.sites.push_back({col, row});
  while (true) {
    const bool can_left = table.has(col - 1, row);
    const bool can_down = table.has(col, row - 1);
    if (!can_left && !can_down) break;
    if (!can_left) {
      --row;
    } else if (!can_down) {
      --col;
    } else if (table.at(col, row - 1) >= table.at(col - 1, row)) {
      --row;  // exact ties step to the e2-predecessor
    } else {
      --col;
    }
    path.sites.push_back({col, row});
  }
  std::reverse(path.sites.begin(), path.sites.end());
  // Record the run of the path along its initial axis direction, if any.
  if (path.sites.size() >= 2) {
    const Site s0 = path.sites[0];
    const bool horizontal = path.sites[1].second == s0.second;
    std::int64_t k = 0;
    for (std::size_t i = 1; i < path.sites.size(); ++i) {
      const bool step_h = path.sites[i].second == path.sites[i - 1].second;
      if (step_h != horizontal) break;
      ++k;
    }
    path.exit_record = std::make_pair(horizontal ? 1 : 2, k);
  }
  return path;
}

StationaryQuadrant stationary_quadrant(std::uint64_t seed, double rho, Site corner,
                                       std::int64_t width, std::int64_t height) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("stationary_quadrant: rho in (0,1)");
  if (width < 2 || height < 2) {
    throw std::invalid_argument("stationary_quadrant: need width, height >= 2");
  }
  StationaryQuadrant q;
  q.rho = rho;
  q.corner = corner;
  q.table.origin_col = corner.first;
  q.table.origin_row = corner.second;
  q.table.source = corner;
  const auto h = static_cast<Eigen::Index>(height);
  const auto w = static_cast<Eigen::Index>(width);
  q.table.d.resize(h, w);
  q.exit_axis.resize(h, w);
  q.exit_index.resize(h, w);

  const rng::Stream sb = rng::stream(seed, rng::kTagBulk);
  const rng::Stream sh = rng::stream(seed, rng::kTagBoundaryH);
  const rng::Stream sv = rng::stream(seed, rng::kTagBoundaryV);

  q.table.d(0, 0) = 0.0;
  q.exit_axis(0, 0) = 0;
  q.exit_index(0, 0) = 0;
  for (Eigen::Index c = 1; c < w; ++c) {
    q.table.d(0, c) =
        q.table.d(0, c - 1) + rng::exp_at(sh, static_cast<std::uint64_t>(c), rho);
    q.exit_axis(0, c) = 1;
    q.exit_index(0, c) = c;
  }
  for (Eigen::Index r = 1; r < h; ++r) {
    q.table.d(r, 0) =
        q.table.d(r - 1, 0) + rng::exp_at(sv, static_cast<std::uint64_t>(r), 1.0 - rho);
    q.exit_axis(r, 0) = 2;
    q.exit_index(r, 0) = r;
  }
  for (Eigen::Index r = 1; r < h; ++r) {
    for (Eigen::Index c = 1; c < w; ++c) {
      const double wgt = rng::exp_at_site(sb, corner.first + c, corner.second + r, 1.0);
      const double dl = q.table.d(r, c - 1);
      const double db = q.table.d(r - 1, c);
      q.table.d(r, c) = wgt + std::max(dl, db);
      if (db > dl) {
        q.exit_axis(r, c) = q.exit_axis(r - 1, c);
        q.exit_index(r, c) = q.exit_index(r - 1, c);
      } else if (dl > db) {
        q.exit_axis(r, c) = q.exit_axis(r, c - 1);
        q.exit_index(r, c) = q.exit_index(r, c - 1);
      } else {
        // Exact tie: the horizontal exit wins.
        const bool left_h = q.exit_axis(r, c - 1) == 1;
        const Eigen::Index rr = left_h ? r : r - 1;
        const Eigen::Index cc = left_h ? c - 1 : c;
        q.exit_axis(r, c) = q.exit_axis(rr, cc);
        q.exit_index(r, c) = q.exit_index(rr, cc);
      }
    }
  }
  return q;
}

BoundaryProfile BoundaryProfile::narrow_wedge(std::int64_t k0, std::int64_t k_min,
                                              std::int64_t k_max) {
  if (k0 < k_min || k0 > k_max) throw std::invalid_argument("narrow_wedge: k0 outside window");
  BoundaryProfile p;
  p.k_min = k_min;
  p.values.assign(static_cast<std::size_t>(k_max - k_min + 1), 0.0);
  p.present.assign(p.values.size(), 0);
  p.present[static_cast<std::size_t>(k0 - k_min)] = 1;
  return p;
}

BoundaryProfile BoundaryProfile::stationary(std::uint64_t seed, double rate, std::int64_t k_min,
                                            std::int64_t k_max) {
  if (!(rate > 0.0)) throw std::invalid_argument("BoundaryProfile::stationary: rate > 0");
  if (k_min > 0 || k_max < 0) {
    throw std::invalid_argument("BoundaryProfile::stationary: window must contain 0");
  }
  BoundaryProfile p;
  p.k_min = k_min;
  p.values.assign(static_cast<std::size_t>(k_max - k_min + 1), 0.0);
  p.present.assign(p.values.size(), 1);
  p.left_rate_hint = rate;
  const rng::Stream s = rng::stream(seed, rng::kTagBoundaryH);
  auto idx = [&](std::int64_t k) { return static_cast<std::size_t>(k - k_min); };
  for (std::int64_t k = 1; k <= k_max; ++k) {
    p.values[idx(k)] = p.values[idx(k - 1)] + rng::exp_at_site(s, k, 0, rate);
  }
  for (std::int64_t k = -1; k >= k_min; --k) {
    p.values[idx(k)] = p.values[idx(k + 1)] - rng::exp_at_site(s, k + 1, 0, rate);
  }
  return p;
}

std::int64_t halfplane_left_width(std::int64_t max_row) {
  const double n = static_cast<double>(std::max<std::int64_t>(max_row, 1));
  const double v = 8.0 * std::pow(n, 2.0 / 3.0) * std::log(n + 1.0);
  return std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(v)), 64);
}

HalfPlaneResult halfplane_with_boundary(const WeightField& field, const BoundaryProfile& h,
                                        const std::vector<Site>& targets) {
  if (targets.empty()) return {};
  std::int64_t max_col = h.k_min;
  std::int64_t max_row = 1;
  for (const auto& t : targets) {
    if (t.second < 1) throw std::invalid_argument("halfplane_with_boundary: target rows start at 1");
    if (t.first < h.k_min) {
      throw std::invalid_argument("halfplane_with_boundary: target left of boundary window");
    }
    max_col = std::max(max_col, t.first);
    max_row = std::max(max_row, t.second);
  }
  max_col = std::min(max_col, h.k_max());
  if (!field.contains(h.k_min, 1) || !field.contains(std::max(max_col, h.k_min), max_row)) {
    throw std::invalid_argument("halfplane_with_boundary: weight field does not cover the DP");
  }
  const std::int64_t w = max_col - h.k_min + 1;
  Eigen::ArrayXd psi(w);
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> lab(w);

  HalfPlaneResult out;
  out.value.assign(targets.size(), kAbsent);
  out.exit_k.assign(targets.size(), h.k_min);
  out.edge_flag.assign(targets.size(), 0);

  auto capture = [&](std::int64_t row) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].second != row) continue;
      const auto c = static_cast<Eigen::Index>(targets[i].first - h.k_min);
      if (psi[c] == kNegInf) {
        throw std::invalid_argument("halfplane_with_boundary: target unreachable from profile");
      }
      out.value[i] = psi[c];
      out.exit_k[i] = lab[c];
      out.edge_flag[i] = (lab[c] == h.k_min || lab[c] == h.k_max()) ? 1 : 0;
    }
  };

  // The row buffer is updated in place: while processing (col, row), psi[c]
  // still holds the value one row below and psi[c-1] already holds the value
  // one column to the left in the current row.
  for (std::int64_t row = 1; row <= max_row; ++row) {
    for (std::int64_t col = h.k_min; col <= max_col; ++col) {
      const auto c = static_cast<Eigen::Index>(col - h.k_min);
      const double wgt = field.at(col, row);
      const double below = row == 1 ? (h.has(col) ? h.at(col) : kNegInf) : psi[c];
      const std::int64_t lab_below = row == 1 ? col : lab[c];
      const double left = c > 0 ? psi[c - 1] : kNegInf;
      const std::int64_t lab_left = c > 0 ? lab[c - 1] : h.k_min;
      double best;
      std::int64_t best_lab;
      if (below > left) {
        best = below;
        best_lab = lab_below;
      } else if (left > below) {
        best = left;
        best_lab = lab_left;
      } else {
        // Exact tie (or both absent): keep the rightmost maximizing site.
        best = below;
        best_lab = std::max(lab_below, lab_left);
      }
      psi[c] = best + wgt;  // -inf propagates through unreachable cells
      lab[c] = best_lab;
    }
    capture(row);
  }
  return out;
}

}  // namespace sh::lattice
