#include "sh/scaling.hpp"

#include "sh/queueing.hpp"
#include "sh/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace sh::scaling {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Cells allowed in one DP rectangle before the request is rejected as
// oversized (roughly 3 GB of transient work at 8 bytes/cell equivalents).
constexpr std::int64_t kMaxCells = 400'000'000;

double pow_two_thirds(std::int64_t n) {
  const double d = static_cast<double>(n);
  return std::cbrt(d * d);
}

double pow_one_third(std::int64_t n) { return std::cbrt(static_cast<double>(n)); }

void require_size(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("scaling: size parameter must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// Frame arithmetic
// ---------------------------------------------------------------------------

double ScalingFrame::space_unit() const {
  require_size(N);
  return std::pow(2.0, 5.0 / 3.0) * pow_two_thirds(N);
}

double ScalingFrame::height_unit() const {
  require_size(N);
  return static_cast<double>(N);
}

double ScalingFrame::value_scale() const {
  require_size(N);
  return std::pow(2.0, 4.0 / 3.0) * pow_one_third(N);
}

double ScalingFrame::value_center(double x, double s, double y, double t) const {
  require_size(N);
  return 4.0 * static_cast<double>(N) * (t - s) +
         std::pow(2.0, 8.0 / 3.0) * pow_two_thirds(N) * (y - x);
}

lattice::Site ScalingFrame::site_of(double x, double s) const {
  require_size(N);
  const double row = s * static_cast<double>(N);
  const double col = row + space_unit() * x;
  return {std::llround(col), std::llround(row)};
}

std::pair<double, double> direction_vector(double rho) {
  if (!(rho > 0.0) || !(rho < 1.0)) {
    throw std::invalid_argument("direction_vector: density must lie strictly in (0,1)");
  }
  const double a = rho * rho;
  const double b = (1.0 - rho) * (1.0 - rho);
  const double z = a + b;
  return {a / z, b / z};
}

// ---------------------------------------------------------------------------
// Busemann estimator
// ---------------------------------------------------------------------------

BusemannEstimate busemann_estimate(
    double rho, const std::vector<std::pair<lattice::Site, lattice::Site>>& point_pairs,
    const std::vector<std::int64_t>& n_schedule, std::uint64_t seed) {
  const auto u = direction_vector(rho);
  if (point_pairs.empty()) throw std::invalid_argument("busemann_estimate: no point pairs");
  if (n_schedule.empty()) throw std::invalid_argument("busemann_estimate: empty schedule");
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (n_schedule[i] < 1 || (i > 0 && n_schedule[i] <= n_schedule[i - 1])) {
      throw std::invalid_argument(
          "busemann_estimate: schedule must be positive and strictly increasing");
    }
  }

  std::int64_t max_col = std::numeric_limits<std::int64_t>::min();
  std::int64_t max_row = max_col;
  for (const auto& [p, q] : point_pairs) {
    max_col = std::max({max_col, p.first, q.first});
    max_row = std::max({max_row, p.second, q.second});
  }

  BusemannEstimate out;
  out.rho = rho;
  out.pairs = point_pairs;
  for (const std::int64_t n : n_schedule) {
    const double dn = static_cast<double>(n);
    const lattice::Site corner{-static_cast<std::int64_t>(std::floor(dn * u.first)),
                               -static_cast<std::int64_t>(std::floor(dn * u.second))};
    const std::int64_t width = max_col - corner.first + 1;
    const std::int64_t height = max_row - corner.second + 1;
    if (width < 1 || height < 1) {
      throw std::invalid_argument("busemann_estimate: point pair behind the corner");
    }
    if (width * height > kMaxCells) {
      throw std::length_error("busemann_estimate: schedule entry needs too large a table");
    }
    const auto field = lattice::sample_weight_field(seed, corner, width, height);
    const auto table = lattice::passage_table(field, corner);
    std::vector<double> row;
    row.reserve(point_pairs.size());
    for (const auto& [p, q] : point_pairs) {
      if (!table.has(p.first, p.second) || !table.has(q.first, q.second)) {
        throw std::invalid_argument(
            "busemann_estimate: point pair outside the cone of the corner");
      }
      row.push_back(table.at(q.first, q.second) - table.at(p.first, p.second));
    }
    out.history.push_back(std::move(row));
  }
  out.values = out.history.back();
  out.n_used = n_schedule.back();
  if (out.history.size() >= 2) {
    const auto& a = out.history[out.history.size() - 2];
    const auto& b = out.history.back();
    out.stabilized = true;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (std::abs(a[j] - b[j]) > 1e-9) {
        out.stabilized = false;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rescaled landscape
// ---------------------------------------------------------------------------

std::vector<double> scaled_landscape(std::int64_t N,
                                     const std::vector<LandscapeQuery>& queries,
                                     std::uint64_t seed) {
  require_size(N);
  const ScalingFrame frame{N};
  const rng::Stream bulk = rng::stream(seed, rng::kTagBulk);
  std::vector<double> out;
  out.reserve(queries.size());
  Eigen::ArrayXd row;
  for (const auto& q : queries) {
    const auto src = frame.site_of(q.x, q.s);
    const auto tgt = frame.site_of(q.y, q.t);
    if (tgt.second < src.second + 1) {
      throw std::invalid_argument(
          "scaled_landscape: query must advance at least one lattice row "
          "(increase t - s or N)");
    }
    if (tgt.first < src.first) {
      throw std::invalid_argument(
          "scaled_landscape: target site left of source; no admissible path");
    }
    const std::int64_t width = tgt.first - src.first + 1;
    const std::int64_t rows = tgt.second - src.second + 1;
    if (width * rows > kMaxCells) {
      throw std::length_error("scaled_landscape: query rectangle too large");
    }
    row.resize(width);
    for (std::int64_t r = src.second; r <= tgt.second; ++r) {
      if (r == src.second) {
        double acc = 0.0;
        for (std::int64_t c = 0; c < width; ++c) {
          acc += rng::exp_at_site(bulk, src.first + c, r, 1.0);
          row[static_cast<Eigen::Index>(c)] = acc;
        }
      } else {
        for (std::int64_t c = 0; c < width; ++c) {
          const double below = row[static_cast<Eigen::Index>(c)];
          const double left = c > 0 ? row[static_cast<Eigen::Index>(c - 1)] : kNegInf;
          row[static_cast<Eigen::Index>(c)] =
              rng::exp_at_site(bulk, src.first + c, r, 1.0) + std::max(below, left);
        }
      }
    }
    const double d = row[static_cast<Eigen::Index>(width - 1)];
    out.push_back((d - frame.value_center(q.x, q.s, q.y, q.t)) / frame.value_scale());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rescaled Busemann lines
// ---------------------------------------------------------------------------

ScaledLineSample scaled_busemann_line(std::int64_t N, const std::vector<double>& xi_list,
                                      double x_lo, double x_hi, std::uint64_t seed,
                                      std::int64_t left_pad_sites) {
  require_size(N);
  if (xi_list.empty()) throw std::invalid_argument("scaled_busemann_line: no directions");
  for (std::size_t i = 1; i < xi_list.size(); ++i) {
    if (!(xi_list[i] > xi_list[i - 1])) {
      throw std::invalid_argument("scaled_busemann_line: directions must be strictly ascending");
    }
  }
  if (!(x_lo < x_hi) || x_lo > 0.0 || x_hi < 0.0) {
    throw std::invalid_argument("scaled_busemann_line: window must satisfy x_lo <= 0 <= x_hi");
  }
  if (left_pad_sites < 0) {
    throw std::invalid_argument("scaled_busemann_line: negative relaxation pad");
  }

  const ScalingFrame frame{N};
  const double su = frame.space_unit();
  const double inv_scale = 1.0 / frame.value_scale();
  const double rate_shift = std::pow(2.0, -4.0 / 3.0) / pow_one_third(N);

  std::vector<double> rates;
  rates.reserve(xi_list.size());
  for (const double xi : xi_list) {
    const double rho = 0.5 - rate_shift * xi;
    if (!(rho > 0.0) || !(rho < 1.0)) {
      throw std::invalid_argument(
          "scaled_busemann_line: direction " + std::to_string(xi) +
          " maps outside (0,1) at this size parameter");
    }
    rates.push_back(rho);
  }

  std::int64_t k_lo = static_cast<std::int64_t>(std::floor(su * x_lo));
  std::int64_t k_hi = static_cast<std::int64_t>(std::ceil(su * x_hi));
  if (k_lo > 0) k_lo = 0;
  if (k_hi < 1) k_hi = 1;

  // One- and two-direction samples are exact on the window (the pair is
  // initialized from its stationary anchor backlog); larger stacks relax from
  // the left edge across the pad.
  queue::MulticlassState state;
  if (rates.size() == 2) {
    state = queue::exact_stationary_pair(rates[0], rates[1], k_lo, k_hi, seed);
  } else {
    const std::int64_t pad = rates.size() >= 3 ? left_pad_sites : 0;
    state = queue::sample_mu(rates, k_lo - pad, k_hi, seed);
  }

  ScaledLineSample out;
  out.N = N;
  out.directions = xi_list;
  out.densities = rates;
  out.seed = seed;
  out.lines.reserve(rates.size());
  const auto n_pts = static_cast<Eigen::Index>(k_hi - k_lo + 1);
  for (const auto& comp : state.components) {
    GridFunction g = GridFunction::make(static_cast<double>(k_lo) / su,
                                        static_cast<double>(k_hi) / su, 1.0 / su, true);
    if (g.size() != n_pts || g.zero_index != -k_lo) {
      throw std::logic_error("scaled_busemann_line: grid layout mismatch");
    }
    double cum = 0.0;
    for (std::int64_t col = 1; col <= k_hi; ++col) {
      cum += comp.at(col);
      g.values[static_cast<Eigen::Index>(col - k_lo)] =
          (cum - 2.0 * static_cast<double>(col)) * inv_scale;
    }
    cum = 0.0;
    for (std::int64_t col = -1; col >= k_lo; --col) {
      cum -= comp.at(col + 1);
      g.values[static_cast<Eigen::Index>(col - k_lo)] =
          (cum - 2.0 * static_cast<double>(col)) * inv_scale;
    }
    out.lines.push_back(std::move(g));
  }
  return out;
}

GridFunction diff_profile(const ScaledLineSample& sample, std::size_t i) {
  if (i < 2 || i > sample.lines.size()) {
    throw std::invalid_argument("diff_profile: index must satisfy 2 <= i <= line count");
  }
  GridFunction g = sample.lines[i - 1];
  g.values -= sample.lines[i - 2].values;
  g.edge_flag = sample.lines[i - 1].edge_flag || sample.lines[i - 2].edge_flag;
  return g;
}

// ---------------------------------------------------------------------------
// Profile-driven growth and geodesics
// ---------------------------------------------------------------------------

lattice::BoundaryProfile kpz_fixed_point_step(const lattice::BoundaryProfile& h,
                                              std::int64_t levels, std::uint64_t seed) {
  if (levels < 0) throw std::invalid_argument("kpz_fixed_point_step: negative level count");
  const std::int64_t k_min = h.k_min;
  const std::int64_t k_max = h.k_max();
  if (k_min > 0 || k_max < 0) {
    throw std::invalid_argument("kpz_fixed_point_step: profile window must contain column 0");
  }

  if (levels == 0) {
    if (!h.has(0)) {
      throw std::invalid_argument("kpz_fixed_point_step: profile absent at column 0");
    }
    lattice::BoundaryProfile out = h;
    const double c = h.at(0);
    for (std::size_t j = 0; j < out.values.size(); ++j) {
      if (out.present[j]) out.values[j] -= c;
    }
    return out;
  }

  std::int64_t first_present = k_max + 1;
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    if (h.has(k)) {
      first_present = k;
      break;
    }
  }
  if (first_present > 0) {
    throw std::invalid_argument(
        "kpz_fixed_point_step: no usable boundary site at or left of column 0");
  }

  const std::int64_t width = k_max - k_min + 1;
  if (width * levels > kMaxCells) {
    throw std::length_error("kpz_fixed_point_step: window x levels too large");
  }
  const auto field =
      lattice::sample_weight_field(seed, lattice::Site{k_min, 1}, width, levels);
  std::vector<lattice::Site> targets;
  targets.reserve(static_cast<std::size_t>(k_max - first_present + 1));
  for (std::int64_t m = first_present; m <= k_max; ++m) targets.push_back({m, levels});
  const auto res = lattice::halfplane_with_boundary(field, h, targets);

  const double psi0 = res.value[static_cast<std::size_t>(0 - first_present)];
  lattice::BoundaryProfile out;
  out.k_min = k_min;
  out.values.assign(static_cast<std::size_t>(width), 0.0);
  out.present.assign(static_cast<std::size_t>(width), 0);
  out.left_rate_hint = h.left_rate_hint;
  out.edge_flag = h.edge_flag;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto j = static_cast<std::size_t>(targets[t].first - k_min);
    out.values[j] = res.value[t] - psi0;
    out.present[j] = 1;
    if (res.edge_flag[t]) out.edge_flag = true;
  }
  return out;
}

namespace {

struct TerminalChoice {
  std::int64_t col = 0;
  double value = kNegInf;
  bool edge = false;
};

TerminalChoice best_terminal(const lattice::PassageTable& table,
                             const lattice::BoundaryProfile& profile,
                             std::int64_t top_row, lattice::Site start,
                             GeodesicSide side) {
  TerminalChoice best;
  bool found = false;
  const std::int64_t lo = std::max(start.first, profile.k_min);
  const std::int64_t hi = std::min(profile.k_max(), table.origin_col + table.width() - 1);
  for (std::int64_t z = lo; z <= hi; ++z) {
    if (!profile.has(z) || !table.has(z, top_row)) continue;
    const double score = profile.at(z) + table.at(z, top_row);
    const bool take = !found ||
                      (side == GeodesicSide::kLeft ? score > best.value : score >= best.value);
    if (take) {
      best.col = z;
      best.value = score;
      found = true;
    }
  }
  if (!found) {
    throw std::invalid_argument(
        "busemann geodesic: no admissible terminal column above the start");
  }
  best.edge = best.col == profile.k_min || best.col == profile.k_max();
  return best;
}

void check_geodesic_inputs(const lattice::WeightField& field, std::int64_t top_row,
                           lattice::Site start) {
  if (!field.contains(start.first, start.second)) {
    throw std::invalid_argument("busemann geodesic: start outside the weight field");
  }
  if (top_row < start.second || top_row >= field.origin_row + field.height()) {
    throw std::invalid_argument("busemann geodesic: top row outside [start row, field top]");
  }
}

}  // namespace

double profile_passage_value(const lattice::WeightField& field,
                             const lattice::BoundaryProfile& profile, std::int64_t top_row,
                             lattice::Site start) {
  check_geodesic_inputs(field, top_row, start);
  const auto table = lattice::passage_table(field, start);
  return best_terminal(table, profile, top_row, start, GeodesicSide::kRight).value;
}

BusemannGeodesic busemann_geodesic(const lattice::WeightField& field,
                                   const lattice::BoundaryProfile& profile,
                                   std::int64_t top_row, lattice::Site start,
                                   GeodesicSide side) {
  check_geodesic_inputs(field, top_row, start);
  const auto table = lattice::passage_table(field, start);
  const auto choice = best_terminal(table, profile, top_row, start, side);
  BusemannGeodesic out;
  out.path = lattice::trace_geodesic(table, {choice.col, top_row});
  out.exit_col = choice.col;
  out.value = choice.value;
  out.edge_flag = choice.edge;
  return out;
}

}  // namespace sh::scaling
