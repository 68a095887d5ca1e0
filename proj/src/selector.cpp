#include "sparse_anova/selector.hpp"

#include "sparse_anova/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

namespace sparse_anova {

void SelectorConfig::validate() const
{
  require(b > 0.0 && b < B && B < 1.0, ErrorCode::invalid_argument, "grid bounds must satisfy 0 < b < B < 1");
  require(M >= 2 && M <= kMaxNodes, ErrorCode::invalid_argument,
          "grid size M must lie in [2, " + std::to_string(kMaxNodes) + "]");
  require(epsilon_rule != EpsilonRuleKind::value || (epsilon_value > 0.0 && std::isfinite(epsilon_value)),
          ErrorCode::invalid_argument, "explicit epsilon must be positive");
  require(tau_rule != TauRuleKind::value || (tau_value > 0.0 && std::isfinite(tau_value)),
          ErrorCode::invalid_argument, "explicit tau must be positive");
}

double SelectorConfig::beta_node(int m) const
{
  require(m >= 1 && m <= M, ErrorCode::invalid_argument, "grid index out of range");
  if (m == M)
    return B;
  return b + (m - 1) * (B - b) / (M - 1);
}

std::vector<double> SelectorConfig::grid() const
{
  std::vector<double> g;
  for (int m = 1; m <= M; ++m)
    g.push_back(beta_node(m));
  return g;
}

double SelectorConfig::epsilon(int d, int k, int s) const
{
  EpsilonRuleKind kind = epsilon_rule;
  if (kind == EpsilonRuleKind::automatic) {
    if (s == 0)
      kind = EpsilonRuleKind::log_binom;
    else
      kind = regime == Regime::fixed_s ? EpsilonRuleKind::log_d : EpsilonRuleKind::log_d_over_s;
  }
  switch (kind) {
  case EpsilonRuleKind::value:
    return epsilon_value;
  case EpsilonRuleKind::log_binom: {
    const double L = log_binomial(d, k);
    require(L > 0.0, ErrorCode::invalid_argument, "epsilon rule needs binom(d,k) > 1");
    return 1.0 / std::sqrt(L);
  }
  case EpsilonRuleKind::log_d:
    require(d >= 2, ErrorCode::invalid_argument, "epsilon rule log d needs d >= 2");
    return 1.0 / std::sqrt(std::log(static_cast<double>(d)));
  case EpsilonRuleKind::log_d_over_s:
    require(s >= 1 && s < d, ErrorCode::invalid_argument, "epsilon rule log(d/s) needs 1 <= s < d");
    return 1.0 / std::sqrt(std::log(static_cast<double>(d) / s));
  case EpsilonRuleKind::automatic:
    break;
  }
  fail(ErrorCode::invalid_argument, "unresolved epsilon rule");
}

double SelectorConfig::tau(int d, int k) const
{
  if (tau_rule == TauRuleKind::value)
    return tau_value;
  const double L = log_binomial(d, k);
  if (regime == Regime::fixed_s)
    return std::max(2.0, L);
  return std::exp(std::sqrt(L) * 5.0 / 16.0);
}

std::string to_string(EpsilonRuleKind k)
{
  switch (k) {
  case EpsilonRuleKind::automatic: return "auto";
  case EpsilonRuleKind::value: return "value";
  case EpsilonRuleKind::log_binom: return "log-binom";
  case EpsilonRuleKind::log_d: return "log-d";
  case EpsilonRuleKind::log_d_over_s: return "log-d-over-s";
  }
  return "?";
}

std::string to_string(TauRuleKind k) { return k == TauRuleKind::automatic ? "auto" : "value"; }
std::string to_string(Regime r) { return r == Regime::fixed_s ? "fixed-s" : "growing-s"; }
std::string to_string(LepskiScan s) { return s == LepskiScan::sequential ? "sequential" : "maximal"; }

EpsilonRuleKind parse_epsilon_rule(const std::string& s)
{
  for (auto k : {EpsilonRuleKind::automatic, EpsilonRuleKind::value, EpsilonRuleKind::log_binom,
                 EpsilonRuleKind::log_d, EpsilonRuleKind::log_d_over_s})
    if (to_string(k) == s)
      return k;
  fail(ErrorCode::invalid_argument, "unknown epsilon rule '" + s + "'");
}

Regime parse_regime(const std::string& s)
{
  if (s == "fixed-s")
    return Regime::fixed_s;
  if (s == "growing-s")
    return Regime::growing_s;
  fail(ErrorCode::invalid_argument, "unknown regime '" + s + "'");
}

LepskiScan parse_lepski_scan(const std::string& s)
{
  if (s == "sequential")
    return LepskiScan::sequential;
  if (s == "maximal")
    return LepskiScan::maximal;
  fail(ErrorCode::invalid_argument, "unknown Lepski scan '" + s + "'");
}

int NodeGrid::snap(double beta) const
{
  int m = 1;
  for (const auto& n : nodes)
    if (n.beta <= beta)
      m = n.m;
  return m;
}

std::vector<double> NodeGrid::thresholds() const
{
  std::vector<double> t;
  for (const auto& n : nodes)
    t.push_back(n.threshold);
  return t;
}

std::vector<double> NodeGrid::slacks() const
{
  std::vector<double> v;
  for (const auto& n : nodes)
    v.push_back(n.v);
  return v;
}

NodeGrid thresholds_and_radii(int d, int k, double sigma, double eps, const SelectorConfig& config,
                              std::optional<int> window, int s)
{
  config.validate();
  require(k >= 1 && k < d, ErrorCode::invalid_argument, "selection needs 1 <= k < d");
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  require(eps > 0.0, ErrorCode::invalid_argument, "noise level must be positive");

  NodeGrid grid;
  grid.d = d;
  grid.k = k;
  grid.sigma = sigma;
  grid.noise = eps;
  grid.window = window;
  grid.epsilon = config.epsilon(d, k, s);
  grid.tau = config.tau(d, k);
  const double L = log_binomial(d, k);

  ExtremalSolver solver(k, sigma, window);
  for (int m = 1; m <= config.M; ++m) {
    GridNode node;
    node.m = m;
    node.beta = config.beta_node(m);
    node.target = std::sqrt(2.0 * node.beta * L);
    try {
      node.r_star = solver.r_star(eps, node.target);
    } catch (const Error& e) {
      fail(e.code(), "grid node m=" + std::to_string(m) + " (beta=" + std::to_string(node.beta) + "): " + e.detail());
    }
    node.profile = solver.solve(eps, node.r_star);
    node.threshold = std::sqrt((2.0 * node.beta + grid.epsilon) * L);
    node.v = std::exp((1.0 - node.beta) * L) / grid.tau;
    grid.nodes.push_back(std::move(node));
  }
  return grid;
}

StatisticKernel::StatisticKernel(const NodeGrid& grid)
{
  require(!grid.nodes.empty(), ErrorCode::invalid_argument, "empty node grid");
  const GridNode* widest = &grid.nodes.front();
  for (const auto& n : grid.nodes)
    if (n.profile.shells.size() > widest->profile.shells.size())
      widest = &n;
  window_ = grid.window;
  shells_ = widest->profile.shells;
  c2_.resize(shells_.size());
  for (std::size_t i = 0; i < shells_.size(); ++i)
    c2_[i] = smoothness_from_norm2(shells_[i].norm2, grid.sigma);
  const std::int64_t smax = shells_.empty() ? 0 : shells_.back().norm2;
  if (smax < kDenseIndexLimit) {
    index_.assign(static_cast<std::size_t>(smax + 1), -1);
    for (std::size_t i = 0; i < shells_.size(); ++i)
      index_[static_cast<std::size_t>(shells_[i].norm2)] = static_cast<std::ptrdiff_t>(i);
  }

  const double eps2 = grid.noise * grid.noise;
  for (const auto& n : grid.nodes) {
    const auto& p = n.profile;
    const std::size_t cut = p.shells.size();
    require(cut >= 1 && (cut > shells_.size() ? false : shells_[cut - 1].norm2 == p.shells.back().norm2),
            ErrorCode::no_convergence, "grid profiles do not share one shell spectrum");
    cut_.push_back(cut);
    scale_.push_back(p.amplitude / (2.0 * eps2 * p.a_value));
    mu_.push_back(p.mu);
    thresholds_.push_back(n.threshold);
  }
}

double StatisticKernel::weight(int m, std::size_t i) const
{
  const auto j = static_cast<std::size_t>(m - 1);
  if (i >= cut_[j])
    return 0.0;
  return scale_[j] * (1.0 - mu_[j] * c2_[i]);
}

std::ptrdiff_t StatisticKernel::shell_index(std::int64_t norm2) const
{
  if (index_.empty() && !shells_.empty()) {
    auto it = std::lower_bound(shells_.begin(), shells_.end(), norm2,
                               [](const Shell& s, std::int64_t v) { return s.norm2 < v; });
    return it != shells_.end() && it->norm2 == norm2 ? it - shells_.begin() : -1;
  }
  if (norm2 < 0 || norm2 >= static_cast<std::int64_t>(index_.size()))
    return -1;
  return index_[static_cast<std::size_t>(norm2)];
}

void StatisticKernel::evaluate(std::span<const double> q, std::span<double> out) const
{
  const std::size_t M = cut_.size();
  // Walk the shells once; nodes are visited in increasing cut order.
  thread_local std::vector<std::size_t> order;
  order.resize(M);
  for (std::size_t j = 0; j < M; ++j)
    order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cut_[a] < cut_[b]; });
  double p = 0.0, r = 0.0;
  std::size_t i = 0;
  for (std::size_t j : order) {
    for (; i < cut_[j]; ++i) {
      const double dev = q[i] - static_cast<double>(shells_[i].multiplicity);
      p += dev;
      r += c2_[i] * dev;
    }
    out[j] = scale_[j] * (p - mu_[j] * r);
  }
}

std::uint64_t StatisticKernel::decide(std::span<const double> stats) const
{
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j < thresholds_.size(); ++j)
    if (stats[j] > thresholds_[j])
      mask |= std::uint64_t{1} << j;
  return mask;
}

std::vector<double> StatisticKernel::null_covariance() const
{
  const std::size_t M = cut_.size();
  std::vector<double> cov(M * M, 0.0);
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = a; b < M; ++b) {
      long double s = 0;
      const std::size_t top = std::min(cut_[a], cut_[b]);
      for (std::size_t i = 0; i < top; ++i)
        s += 2.0L * static_cast<long double>(shells_[i].multiplicity) *
             weight(static_cast<int>(a + 1), i) * weight(static_cast<int>(b + 1), i);
      cov[a * M + b] = cov[b * M + a] = static_cast<double>(s);
    }
  return cov;
}

std::vector<double> StatisticKernel::weight_mass() const
{
  std::vector<double> out(cut_.size());
  for (std::size_t j = 0; j < cut_.size(); ++j) {
    long double s = 0;
    for (std::size_t i = 0; i < cut_[j]; ++i)
      s += static_cast<long double>(shells_[i].multiplicity) * weight(static_cast<int>(j + 1), i);
    out[j] = static_cast<double>(s);
  }
  return out;
}

namespace {

bool inside_window(const FrequencyVector& l, const std::optional<int>& window)
{
  if (!window)
    return true;
  for (int v : l.entries())
    if (std::abs(v) > *window)
      return false;
  return true;
}

} // namespace

double statistic(const Lattice& lattice, std::span<const double> x, const ExtremalProfile& profile)
{
  require(lattice.size() == x.size(), ErrorCode::dimension_mismatch, "data and lattice lengths differ");
  require(profile.epsilon > 0.0, ErrorCode::invalid_argument, "profile has no noise level");
  if (profile.shells.empty())
    return 0.0;
  const std::int64_t top = profile.shells.back().norm2;
  long double s = 0;
  std::int64_t matched = 0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const std::int64_t n2 = lattice[i].norm2();
    if (n2 > top || !inside_window(lattice[i], profile.window) || lattice[i].size() != profile.k)
      continue;
    const double w = profile.weight_for_norm2(n2);
    if (w == 0.0)
      continue;
    const double z = x[i] / profile.epsilon;
    s += static_cast<long double>(w) * (z * z - 1.0);
    ++matched;
  }
  require(matched == profile.support_size(), ErrorCode::missing_frequency,
          "data cover " + std::to_string(matched) + " of " + std::to_string(profile.support_size()) +
            " support frequencies");
  return static_cast<double>(s);
}

std::vector<double> shell_sums(const StatisticKernel& kernel, const Lattice& lattice, std::span<const double> x,
                               double noise)
{
  require(lattice.size() == x.size(), ErrorCode::dimension_mismatch, "data and lattice lengths differ");
  require(noise > 0.0, ErrorCode::invalid_argument, "noise level must be positive");
  const auto& shells = kernel.shells();
  std::vector<double> q(shells.size(), 0.0);
  std::vector<std::int64_t> seen(shells.size(), 0);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto idx = kernel.shell_index(lattice[i].norm2());
    if (idx < 0 || !inside_window(lattice[i], kernel.window()))
      continue;
    const double z = x[i] / noise;
    q[static_cast<std::size_t>(idx)] += z * z;
    ++seen[static_cast<std::size_t>(idx)];
  }
  for (std::size_t i = 0; i < shells.size(); ++i)
    if (seen[i] != shells[i].multiplicity)
      fail(ErrorCode::missing_frequency, "shell |l|^2=" + std::to_string(shells[i].norm2) + " has " +
                                           std::to_string(seen[i]) + " of " +
                                           std::to_string(shells[i].multiplicity) + " frequencies");
  return q;
}

bool SelectionOutcome::selected(const SubsetId& u, int d) const
{
  const auto r = subset_rank(u, d);
  require(r < decisions.size(), ErrorCode::index_mismatch, "subset outside the decision vector");
  return decisions[r] != 0;
}

namespace {

int lepski_from_distances(const std::vector<std::vector<std::uint64_t>>& dist, std::span<const double> v,
                          LepskiScan scan)
{
  const int M = static_cast<int>(dist.size());
  require(static_cast<int>(v.size()) >= M, ErrorCode::index_mismatch, "one slack per grid node is required");
  auto admissible = [&](int m) {
    for (int j = 1; j < m; ++j)
      if (static_cast<double>(dist[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(j - 1)]) >
          v[static_cast<std::size_t>(j - 1)])
        return false;
    return true;
  };
  int m_hat = 1;
  for (int m = 2; m <= M; ++m) {
    if (admissible(m))
      m_hat = m;
    else if (scan == LepskiScan::sequential)
      break;
  }
  return m_hat;
}

} // namespace

int lepski_index(const std::vector<std::vector<std::uint8_t>>& per_node, std::span<const double> v,
                 LepskiScan scan)
{
  require(!per_node.empty(), ErrorCode::invalid_argument, "no decision vectors");
  const std::size_t n = per_node.front().size();
  for (const auto& d : per_node)
    require(d.size() == n, ErrorCode::index_mismatch, "decision vectors differ in length");
  const std::size_t M = per_node.size();
  std::vector<std::vector<std::uint64_t>> dist(M, std::vector<std::uint64_t>(M, 0));
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      std::uint64_t h = 0;
      for (std::size_t u = 0; u < n; ++u)
        h += (per_node[a][u] != 0) != (per_node[b][u] != 0);
      dist[a][b] = dist[b][a] = h;
    }
  return lepski_from_distances(dist, v, scan);
}

int lepski_index(std::span<const std::uint64_t> masks, std::span<const double> v, LepskiScan scan)
{
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t m : masks)
    ++counts[m];
  return lepski_index(counts, v, scan);
}

int lepski_index(const std::unordered_map<std::uint64_t, std::uint64_t>& counts, std::span<const double> v,
                 LepskiScan scan)
{
  const std::size_t M = v.size();
  require(M >= 1 && M <= 64, ErrorCode::invalid_argument, "grid size must lie in [1, 64]");
  std::vector<std::vector<std::uint64_t>> dist(M, std::vector<std::uint64_t>(M, 0));
  for (const auto& [mask, n] : counts)
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = 0; b < a; ++b)
        if (((mask >> a) ^ (mask >> b)) & 1U) {
          dist[a][b] += n;
          dist[b][a] += n;
        }
  return lepski_from_distances(dist, v, scan);
}

std::vector<std::vector<double>> node_statistics(const ObservationSet& obs, const NodeGrid& grid)
{
  const StatisticKernel kernel(grid);
  const double noise = obs.noise > 0.0 ? obs.noise : grid.noise;
  std::vector<std::vector<double>> out;
  out.reserve(binomial(grid.d, grid.k));
  std::vector<double> stats(static_cast<std::size_t>(grid.size()));
  for (const SubsetId& u : enumerate_subsets(grid.d, grid.k)) {
    auto it = obs.values.find(u);
    require(it != obs.values.end(), ErrorCode::missing_frequency, "no observations for subset " + u.to_string());
    const auto q = shell_sums(kernel, obs.lattice, it->second, noise);
    kernel.evaluate(q, stats);
    out.push_back(stats);
  }
  return out;
}

SelectionOutcome select_fixed_beta(const ObservationSet& obs, const NodeGrid& grid, double beta,
                                   bool keep_statistics)
{
  require(beta > 0.0 && beta < 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1)");
  auto stats = node_statistics(obs, grid);
  SelectionOutcome out;
  out.k = grid.k;
  out.m_hat = grid.snap(beta);
  out.thresholds = grid.thresholds();
  const auto j = static_cast<std::size_t>(out.m_hat - 1);
  for (const auto& s : stats)
    out.decisions.push_back(s[j] > out.thresholds[j] ? 1 : 0);
  if (keep_statistics)
    out.statistics = std::move(stats);
  return out;
}

SelectionOutcome select_adaptive(const ObservationSet& obs, const NodeGrid& grid, const SelectorConfig& config,
                                 bool keep_statistics)
{
  auto stats = node_statistics(obs, grid);
  const StatisticKernel kernel(grid);
  std::vector<std::uint64_t> masks;
  masks.reserve(stats.size());
  for (const auto& s : stats)
    masks.push_back(kernel.decide(s));
  const auto v = grid.slacks();
  SelectionOutcome out;
  out.k = grid.k;
  out.m_hat = lepski_index(masks, v, config.scan);
  out.thresholds = grid.thresholds();
  for (std::uint64_t m : masks)
    out.decisions.push_back(static_cast<std::uint8_t>((m >> (out.m_hat - 1)) & 1U));
  if (keep_statistics)
    out.statistics = std::move(stats);
  return out;
}

std::map<int, SelectionOutcome> select_aggregate(const std::map<int, ObservationSet>& obs_by_order, int d,
                                                 double sigma, double eps, const SelectorConfig& config,
                                                 const std::map<int, int>& windows)
{
  require(!obs_by_order.empty(), ErrorCode::invalid_argument, "aggregate selection needs at least one order");
  const int s = static_cast<int>(obs_by_order.size());
  std::map<int, SelectionOutcome> out;
  for (const auto& [k, obs] : obs_by_order) {
    std::optional<int> window;
    if (auto it = windows.find(k); it != windows.end())
      window = it->second;
    try {
      const NodeGrid grid = thresholds_and_radii(d, k, sigma, eps, config, window, s);
      out.emplace(k, select_adaptive(obs, grid, config));
    } catch (const Error& e) {
      fail(e.code(), "order k=" + std::to_string(k) + ": " + e.detail());
    }
  }
  return out;
}

} // namespace sparse_anova
