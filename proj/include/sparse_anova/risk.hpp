#pragma once

#include "sparse_anova/model.hpp"
#include "sparse_anova/selector.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparse_anova {

std::uint64_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

//! How the statistics of one replicate are drawn.
enum class Sampler {
  automatic,  ///< shell when the draw count fits the budget, else gaussian
  frequency,  ///< one normal per frequency, exactly as sample_data
  shell,      ///< exact shell sums: (noncentral) chi-square per shell
  gaussian,   ///< null subsets from the exact mean/covariance of S_1..S_M; actives as shell
};

std::string to_string(Sampler);
Sampler parse_sampler(const std::string&);

struct SimulationOptions {
  Sampler sampler = Sampler::automatic;
  int threads = 0;           ///< 0 means all hardware threads
  double draw_budget = 1e8;  ///< shell draws allowed before `automatic` switches to gaussian
};

struct RiskRow {
  int d = 0;
  int k = 0;  ///< order, or s for an aggregate over 1..s
  bool aggregate = false;
  double alpha = 1.0;
  std::string label;  ///< free-form tag, e.g. the dichotomy margin
  double beta = 0.0;  ///< derived sparsity index (single order)
  double err = 0.0;
  double err_sd = 0.0;
  double false_pos = 0.0;
  double false_neg = 0.0;
  int J = 0;
  std::uint64_t seed = 0;
  std::string sampler;
  std::vector<int> m_hat;  ///< per replicate (single order)
  double wall_time = 0.0;
};

struct RiskReport {
  std::vector<RiskRow> rows;
  double wall_time = 0.0;

  //! JSON with full-precision numbers; timings only when asked so that
  //! reruns are byte-identical.
  std::string to_json(bool include_timing = false) const;
  //! Rows (k, d, beta) against alpha columns, Err to 4 decimals.
  std::string table2_csv() const;
  //! One line per row: d, k, aggregate, alpha, label, beta, err, err_sd,
  //! false_pos, false_neg, J, seed, sampler.
  std::string rows_csv() const;
};

//! Monte Carlo risk for an instance (aggregate when it has several orders).
RiskReport estimate_risk(const ModelInstance& m, const SelectorConfig& config, int J, std::uint64_t seed,
                         const SimulationOptions& options = {});

//! Risk for each alpha applied to subset `u`, reusing every other draw
//! across alphas (common random numbers).
RiskReport estimate_risk_sweep(const ModelInstance& m, const SubsetId& u, const std::vector<double>& alphas,
                               const SelectorConfig& config, int J, std::uint64_t seed,
                               const SimulationOptions& options = {});

enum class Phase { exact, almost_full, none, boundary };
std::string to_string(Phase);

Phase phase_classify(double beta, double gamma);

struct BoundaryPoint {
  double beta = 0.0;
  double gamma_almost_full = 0.0;  ///< beta
  double gamma_exact = 0.0;        ///< (1 + sqrt(1 - beta))^2
};

std::vector<BoundaryPoint> boundary_curves(std::span<const double> betas);

//! Number of actives floor(binom(d,k)^(1 - beta)), at least 1.
std::uint64_t dichotomy_active_count(int d, int k, double beta);

//! Instance whose actives (the first subsets in lexicographic order) carry
//! the extremal sequence at a = (1 + margin) sqrt(2 beta log binom(d,k)).
ModelInstance dichotomy_instance(int k, double sigma, double eps, int d, double beta, double margin,
                                 std::optional<int> window = std::nullopt);

RiskReport boundary_dichotomy_experiment(int k, double sigma, double eps, int d, double beta, double margin,
                                         int J, std::uint64_t seed, const SelectorConfig& config = {},
                                         const SimulationOptions& options = {});

} // namespace sparse_anova
