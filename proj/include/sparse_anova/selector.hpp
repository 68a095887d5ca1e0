#pragma once

#include "sparse_anova/combinatorics.hpp"
#include "sparse_anova/extremal.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sparse_anova {

enum class EpsilonRuleKind {
  automatic,  ///< (log binom(d,k))^(-1/2) for one order; the regime rule for aggregates
  value,      ///< fixed number
  log_binom,  ///< (log binom(d,k))^(-1/2)
  log_d,      ///< (log d)^(-1/2)
  log_d_over_s,  ///< (log(d/s))^(-1/2)
};

enum class TauRuleKind {
  automatic,  ///< max(2, log binom) for fixed s, exp(5/16 sqrt(log binom)) for growing s
  value,
};

enum class Regime { fixed_s, growing_s };

enum class LepskiScan {
  sequential,  ///< start at 1, advance while every constraint holds
  maximal,     ///< largest m whose constraints hold, gaps allowed
};

struct SelectorConfig {
  double b = 0.001;
  double B = 0.999;
  int M = 20;
  EpsilonRuleKind epsilon_rule = EpsilonRuleKind::automatic;
  double epsilon_value = 0.0;
  TauRuleKind tau_rule = TauRuleKind::automatic;
  double tau_value = 0.0;
  Regime regime = Regime::fixed_s;
  LepskiScan scan = LepskiScan::sequential;

  //! Node masks are 64-bit, hence M <= 64.
  static constexpr int kMaxNodes = 64;

  void validate() const;
  //! beta_m = b + (m - 1)(B - b)/(M - 1), m = 1..M.
  double beta_node(int m) const;
  std::vector<double> grid() const;
  //! s = 0 for a single order, otherwise the number of orders aggregated.
  double epsilon(int d, int k, int s = 0) const;
  double tau(int d, int k) const;
};

std::string to_string(EpsilonRuleKind);
std::string to_string(TauRuleKind);
std::string to_string(Regime);
std::string to_string(LepskiScan);
EpsilonRuleKind parse_epsilon_rule(const std::string&);
Regime parse_regime(const std::string&);
LepskiScan parse_lepski_scan(const std::string&);

struct GridNode {
  int m = 0;
  double beta = 0.0;
  double target = 0.0;     ///< sqrt(2 beta log binom(d,k))
  double r_star = 0.0;
  double threshold = 0.0;  ///< sqrt((2 beta + epsilon) log binom(d,k))
  double v = 0.0;          ///< Lepski slack binom^(1 - beta) / tau
  ExtremalProfile profile;
};

struct NodeGrid {
  int d = 0;
  int k = 0;
  double sigma = 0.0;
  double noise = 0.0;  ///< eps
  double epsilon = 0.0;
  double tau = 0.0;
  std::optional<int> window;
  std::vector<GridNode> nodes;

  int size() const noexcept { return static_cast<int>(nodes.size()); }
  //! Node whose beta is the largest grid value <= beta (node 1 below the grid).
  int snap(double beta) const;
  std::vector<double> thresholds() const;
  std::vector<double> slacks() const;
};

NodeGrid thresholds_and_radii(int d, int k, double sigma, double eps, const SelectorConfig& config,
                              std::optional<int> window = std::nullopt, int s = 0);

//! All node statistics of one subset from shell sums of (X/eps)^2. The grid
//! profiles have nested supports (larger beta, larger r*, fewer shells), so
//! S_m = K_m [P(cut_m) - mu_m R(cut_m)] with P, R prefix sums of (Q_s - n_s)
//! and c_s^2 (Q_s - n_s).
class StatisticKernel {
public:
  explicit StatisticKernel(const NodeGrid& grid);

  //! Union support shells (those of node 1).
  const std::vector<Shell>& shells() const noexcept { return shells_; }
  const std::vector<double>& c2() const noexcept { return c2_; }
  int nodes() const noexcept { return static_cast<int>(cut_.size()); }
  std::size_t cut(int m) const { return cut_[static_cast<std::size_t>(m - 1)]; }
  //! Weight omega of node m on union shell i (0 outside the node's support).
  double weight(int m, std::size_t i) const;
  //! Shell index of norm2, or -1.
  std::ptrdiff_t shell_index(std::int64_t norm2) const;

  //! q[i] = sum over shell i of (X_l / eps)^2; writes S_1..S_M into `out`.
  void evaluate(std::span<const double> q, std::span<double> out) const;
  //! Bit m-1 set iff S_m > threshold_m.
  std::uint64_t decide(std::span<const double> stats) const;

  //! Null covariance 2 sum_s n_s w_m(s) w_j(s), row-major M x M.
  std::vector<double> null_covariance() const;
  //! sum_s n_s w_m(s) for each node.
  std::vector<double> weight_mass() const;
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::optional<int>& window() const noexcept { return window_; }

private:
  std::optional<int> window_;
  std::vector<Shell> shells_;
  std::vector<double> c2_;
  //! Dense norm2 -> shell index below this norm2, binary search above.
  static constexpr std::int64_t kDenseIndexLimit = std::int64_t{1} << 24;
  std::vector<std::ptrdiff_t> index_;  ///< dense norm2 -> shell index
  std::vector<std::size_t> cut_;
  std::vector<double> scale_, mu_, thresholds_;
};

//! Observations X_l on a common lattice for a set of subsets of one order.
struct ObservationSet {
  double noise = 0.0;  ///< eps used to normalise X
  Lattice lattice;
  std::map<SubsetId, std::vector<double>> values;
};

//! sum_l omega_l ((X_l / eps)^2 - 1) over the profile support. The data may
//! cover more frequencies than the support; missing ones are an error.
double statistic(const Lattice& lattice, std::span<const double> x, const ExtremalProfile& profile);

//! Shell sums of (X/eps)^2 for the kernel's union shells; throws
//! missing-frequency unless every union frequency is present exactly once.
std::vector<double> shell_sums(const StatisticKernel& kernel, const Lattice& lattice,
                               std::span<const double> x, double noise);

struct SelectionOutcome {
  int k = 0;
  std::vector<std::uint8_t> decisions;  ///< indexed by lexicographic subset rank
  int m_hat = 1;
  std::vector<double> thresholds;
  //! statistics[rank][m - 1], kept when requested.
  std::optional<std::vector<std::vector<double>>> statistics;

  bool selected(const SubsetId& u, int d) const;
};

//! Lepski index from per-node decision vectors (all the same length).
int lepski_index(const std::vector<std::vector<std::uint8_t>>& per_node, std::span<const double> v,
                 LepskiScan scan = LepskiScan::sequential);

//! Same rule on packed per-subset node masks; dist[m][j] is accumulated from
//! the distinct mask values.
int lepski_index(std::span<const std::uint64_t> masks, std::span<const double> v,
                 LepskiScan scan = LepskiScan::sequential);

//! Same rule from the multiplicity of each distinct mask value.
int lepski_index(const std::unordered_map<std::uint64_t, std::uint64_t>& mask_counts, std::span<const double> v,
                 LepskiScan scan = LepskiScan::sequential);

//! Per-node statistics for every subset of order grid.k, in rank order.
std::vector<std::vector<double>> node_statistics(const ObservationSet& obs, const NodeGrid& grid);

SelectionOutcome select_fixed_beta(const ObservationSet& obs, const NodeGrid& grid, double beta,
                                   bool keep_statistics = false);
SelectionOutcome select_adaptive(const ObservationSet& obs, const NodeGrid& grid, const SelectorConfig& config,
                                 bool keep_statistics = false);
//! Adaptive selection for each order present in `obs_by_order`, with the
//! epsilon rule of the aggregate regime.
std::map<int, SelectionOutcome> select_aggregate(const std::map<int, ObservationSet>& obs_by_order, int d,
                                                 double sigma, double eps, const SelectorConfig& config,
                                                 const std::map<int, int>& windows = {});

} // namespace sparse_anova
