#include "sh/queueing.hpp"

#include <stdexcept>
#include <string>

namespace sh::queue {

namespace {

void check_pair(const Sequence& omega, const Sequence& inter_arrival, double initial_backlog) {
  if (omega.k_min != inter_arrival.k_min || omega.values.size() != inter_arrival.values.size()) {
    throw std::invalid_argument("queue map: omega and inter_arrival windows differ");
  }
  if (omega.values.size() < 2) throw std::invalid_argument("queue map: window too small");
  if (!(initial_backlog >= 0.0)) throw std::invalid_argument("queue map: backlog must be >= 0");
}

// Shared core: cumulative departures via the recursion
//   F~(l) = omega(l) + max(F~(l-1), F(l)),   F~(k_min) = omega(k_min) + backlog,
// which matches the passage-value recursion operation for operation.
Eigen::ArrayXd cumulative_departures(const Sequence& omega, const Sequence& inter_arrival,
                                     double initial_backlog, bool* edge_flag) {
  const Eigen::Index n = omega.values.size();
  Eigen::ArrayXd ft(n);
  ft[0] = omega.values[0] + initial_backlog;
  double f = 0.0;               // running cumulative of inter-arrivals, F(k_min) = 0
  Eigen::Index argmax = 0;      // rightmost maximizer of the window part
  bool edge_at_mid = false;
  const Eigen::Index mid = n / 2;
  for (Eigen::Index l = 1; l < n; ++l) {
    f += inter_arrival.values[l];
    double base;
    if (f >= ft[l - 1]) {
      base = f;
      argmax = l;
    } else {
      base = ft[l - 1];
    }
    ft[l] = omega.values[l] + base;
    if (l == mid && argmax == 0) edge_at_mid = true;
  }
  if (edge_flag) *edge_flag = edge_at_mid;
  return ft;
}

}  // namespace

Sequence queue_D(const Sequence& omega, const Sequence& inter_arrival, double initial_backlog,
                 bool* edge_flag) {
  check_pair(omega, inter_arrival, initial_backlog);
  const Eigen::ArrayXd ft = cumulative_departures(omega, inter_arrival, initial_backlog, edge_flag);
  Sequence out;
  out.k_min = omega.k_min;
  out.values.resize(ft.size());
  out.values[0] = 0.0;  // anchor slot, not part of the increment process
  for (Eigen::Index l = 1; l < ft.size(); ++l) out.values[l] = ft[l] - ft[l - 1];
  return out;
}

Sequence queue_S(const Sequence& omega, const Sequence& inter_arrival, double initial_backlog) {
  check_pair(omega, inter_arrival, initial_backlog);
  const Eigen::ArrayXd ft = cumulative_departures(omega, inter_arrival, initial_backlog, nullptr);
  Sequence out;
  out.k_min = omega.k_min;
  out.values.resize(ft.size());
  double f = 0.0;
  out.values[0] = ft[0];
  for (Eigen::Index l = 1; l < ft.size(); ++l) {
    f += inter_arrival.values[l];
    out.values[l] = ft[l] - f;
  }
  return out;
}

double stationary_backlog(double service_rate, double arrival_rate, const rng::Stream& s,
                          std::uint64_t index) {
  if (!(arrival_rate > 0.0 && service_rate > arrival_rate)) {
    throw std::invalid_argument("stationary_backlog: need 0 < arrival_rate < service_rate");
  }
  const rng::Block b = rng::block_at(s, index);
  const double u1 = rng::u01(b.a);
  if (u1 < 1.0 - arrival_rate / service_rate) return 0.0;
  return -std::log(rng::u01(b.b)) / (service_rate - arrival_rate);
}

static void check_rates(const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("sample_mu: need at least one rate");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0)) throw std::invalid_argument("sample_mu: rates must be positive");
    if (i > 0 && !(rates[i] < rates[i - 1])) {
      throw std::invalid_argument("sample_mu: rates must be strictly decreasing");
    }
  }
}

MulticlassState sample_mu(const std::vector<double>& rates, std::int64_t k_min,
                          std::int64_t k_max, std::uint64_t seed) {
  check_rates(rates);
  if (k_max - k_min < 1) throw std::invalid_argument("sample_mu: window too small");
  const auto n_win = static_cast<Eigen::Index>(k_max - k_min + 1);
  const rng::Stream s = rng::stream(seed, rng::kTagSeq);

  std::vector<Sequence> inputs(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    inputs[i].k_min = k_min;
    inputs[i].values.resize(n_win);
    rng::fill_exp(rng::substream(s, static_cast<std::uint64_t>(i)), 0, rates[i],
                  inputs[i].values.data(), n_win);
  }

  MulticlassState st;
  st.rates = rates;
  st.components.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    Sequence cur = inputs[i];
    for (std::size_t j = i; j-- > 0;) cur = queue_D(inputs[j], cur);
    st.components[i] = std::move(cur);
  }
  return st;
}

MulticlassState evolve_levels(const MulticlassState& state,
                              const std::vector<Sequence>& bulk_rows) {
  MulticlassState st = state;
  for (const auto& row : bulk_rows) {
    for (auto& comp : st.components) comp = queue_D(row, comp);
  }
  return st;
}

MulticlassState exact_stationary_pair(double rate1, double rate2, std::int64_t k_min,
                                      std::int64_t k_max, std::uint64_t seed) {
  if (!(rate2 > 0.0 && rate1 > rate2)) {
    throw std::invalid_argument("exact_stationary_pair: need 0 < rate2 < rate1");
  }
  const auto n_win = static_cast<Eigen::Index>(k_max - k_min + 1);
  if (n_win < 2) throw std::invalid_argument("exact_stationary_pair: window too small");
  const rng::Stream s = rng::stream(seed, rng::kTagSeq);
  Sequence i1{k_min, Eigen::ArrayXd(n_win)};
  Sequence i2{k_min, Eigen::ArrayXd(n_win)};
  rng::fill_exp(rng::substream(s, 0), 0, rate1, i1.values.data(), n_win);
  rng::fill_exp(rng::substream(s, 1), 0, rate2, i2.values.data(), n_win);
  const double w = stationary_backlog(rate1, rate2, rng::stream(seed, rng::kTagBacklog), 0);
  MulticlassState st;
  st.rates = {rate1, rate2};
  st.components = {i1, queue_D(i1, i2, w)};
  return st;
}

}  // namespace sh::queue
