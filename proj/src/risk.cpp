#include "sparse_anova/risk.hpp"

#include "sparse_anova/errors.hpp"
#include "sparse_anova/extremal.hpp"
#include "sparse_anova/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace sparse_anova {

std::uint64_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
  require(a.size() == b.size(), ErrorCode::index_mismatch,
          "decision vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    h += (a[i] != 0) != (b[i] != 0);
  return h;
}

std::string to_string(Sampler s)
{
  switch (s) {
  case Sampler::automatic: return "auto";
  case Sampler::frequency: return "frequency";
  case Sampler::shell: return "shell";
  case Sampler::gaussian: return "gaussian";
  }
  return "?";
}

Sampler parse_sampler(const std::string& s)
{
  for (auto v : {Sampler::automatic, Sampler::frequency, Sampler::shell, Sampler::gaussian})
    if (to_string(v) == s)
      return v;
  fail(ErrorCode::invalid_argument, "unknown sampler '" + s + "'");
}

namespace {

constexpr std::uint64_t kShellStream = 0x5348454cULL;

struct ActiveSignal {
  SubsetId subset;
  double alpha = 1.0;
  std::vector<double> root_energy;  ///< sqrt(sum over shell of (theta/eps)^2)
  std::vector<double> theta;        ///< theta/eps on the union lattice (frequency sampler)
};

//! Per-replicate outcome of one order for each alpha of the sweep.
struct OrderTally {
  std::vector<int> m_hat;
  std::vector<std::uint64_t> false_pos, false_neg;
};

//! Draws node statistics for every subset of one order and runs the selector.
class OrderEngine {
public:
  OrderEngine(const ModelInstance& m, int k, const SelectorConfig& config, Sampler sampler, int aggregate_s,
              int J, double draw_budget)
    : k_(k)
    , grid_(thresholds_and_radii(m.d, k, m.sigma, m.epsilon, config, m.window(k), aggregate_s))
    , kernel_(grid_)
    , scan_(config.scan)
    , nu_(m.noise_scale)
    , total_(binomial(m.d, k))
    , slacks_(grid_.slacks())
  {
    beta_ = m.beta(k);
    norm_ = std::exp((beta_ - 1.0) * log_binomial(m.d, k));

    sampler_ = sampler;
    if (sampler_ == Sampler::automatic) {
      const double draws = static_cast<double>(J) * static_cast<double>(total_) *
                           static_cast<double>(kernel_.shells().size());
      sampler_ = draws <= draw_budget ? Sampler::shell : Sampler::gaussian;
    }

    const auto& shells = kernel_.shells();
    if (sampler_ == Sampler::frequency) {
      const double radius = std::sqrt(static_cast<double>(shells.back().norm2) + 0.5);
      lattice_ = enumerate_frequencies(k, radius, grid_.window);
      lattice_shell_.reserve(lattice_.size());
      for (const auto& l : lattice_)
        lattice_shell_.push_back(kernel_.shell_index(l.norm2()));
    }
    if (sampler_ == Sampler::gaussian) {
      const int M = kernel_.nodes();
      const auto cov = kernel_.null_covariance();
      Eigen::MatrixXd C(M, M);
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
          C(a, b) = cov[static_cast<std::size_t>(a * M + b)];
      Eigen::LLT<Eigen::MatrixXd> llt(C);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        chol_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      }
      chol_ *= nu_ * nu_;
      null_mean_ = kernel_.weight_mass();
      for (double& v : null_mean_)
        v *= nu_ * nu_ - 1.0;
    }

    for (const auto& [u, spec] : m.active) {
      if (u.size() != k)
        continue;
      ActiveSignal a;
      a.subset = u;
      a.alpha = m.alpha_of(u);
      const auto energy = component_shell_energy(spec, shells, grid_.window);
      for (double e : energy)
        a.root_energy.push_back(std::sqrt(e) / m.epsilon);
      if (sampler_ == Sampler::frequency) {
        a.theta = component_coefficients(spec, lattice_);
        for (double& t : a.theta)
          t /= m.epsilon;
      }
      actives_.emplace(subset_rank(u, m.d), std::move(a));
    }
  }

  Sampler sampler() const noexcept { return sampler_; }
  double beta() const noexcept { return beta_; }
  double norm() const noexcept { return norm_; }
  bool has_rank(std::uint64_t r) const { return actives_.count(r) != 0; }

  //! One replicate. `scaled` is the rank whose alpha is swept (if any).
  OrderTally run(std::uint64_t rep_seed, std::optional<std::uint64_t> scaled, std::span<const double> alphas) const
  {
    const int M = kernel_.nodes();
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    std::vector<std::uint64_t> inactive_on(static_cast<std::size_t>(M), 0), active_on(static_cast<std::size_t>(M), 0);
    std::uint64_t fixed_actives = 0;
    std::vector<double> q(kernel_.shells().size()), stats(static_cast<std::size_t>(M));

    for (std::uint64_t r = 0; r < total_; ++r) {
      if (scaled && r == *scaled)
        continue;
      auto it = actives_.find(r);
      const ActiveSignal* a = it == actives_.end() ? nullptr : &it->second;
      const std::uint64_t mask = draw_mask(rep_seed, r, a, a ? a->alpha : 0.0, q, stats);
      ++counts[mask];
      auto& on = a ? active_on : inactive_on;
      fixed_actives += a ? 1 : 0;
      for (int j = 0; j < M; ++j)
        on[static_cast<std::size_t>(j)] += (mask >> j) & 1U;
    }

    OrderTally t;
    const std::size_t n_alpha = scaled ? alphas.size() : 1;
    for (std::size_t i = 0; i < n_alpha; ++i) {
      std::uint64_t scaled_mask = 0;
      const ActiveSignal* sa = nullptr;
      if (scaled) {
        sa = &actives_.at(*scaled);
        scaled_mask = draw_mask(rep_seed, *scaled, sa, alphas[i], q, stats);
        ++counts[scaled_mask];
      }
      const int m_hat = lepski_index(counts, slacks_, scan_);
      const auto bit = static_cast<std::size_t>(m_hat - 1);
      std::uint64_t fn = fixed_actives - active_on[bit];
      if (sa && !((scaled_mask >> bit) & 1U))
        ++fn;
      t.m_hat.push_back(m_hat);
      t.false_pos.push_back(inactive_on[bit]);
      t.false_neg.push_back(fn);
      if (scaled && --counts[scaled_mask] == 0)
        counts.erase(scaled_mask);
    }
    return t;
  }

private:
  std::uint64_t draw_mask(std::uint64_t rep_seed, std::uint64_t rank, const ActiveSignal* a, double alpha,
                          std::vector<double>& q, std::vector<double>& stats) const
  {
    const auto& shells = kernel_.shells();
    if (sampler_ == Sampler::frequency) {
      std::fill(q.begin(), q.end(), 0.0);
      const SubsetId u = a ? a->subset : SubsetId{};
      for (std::size_t i = 0; i < lattice_.size(); ++i) {
        const auto s = lattice_shell_[i];
        if (s < 0)
          continue;
        double z = 0.0;
        if (nu_ > 0.0) {
          SplitMix64 gen(frequency_key(rep_seed, k_, rank, lattice_[i]));
          z = nu_ * standard_normal(gen);
        }
        if (a)
          z += alpha * a->theta[i];
        q[static_cast<std::size_t>(s)] += z * z;
      }
      kernel_.evaluate(q, stats);
      return kernel_.decide(stats);
    }

    SplitMix64 gen(stream_key({rep_seed, static_cast<std::uint64_t>(k_), rank, kShellStream}));
    if (!a && sampler_ == Sampler::gaussian) {
      const int M = kernel_.nodes();
      Eigen::VectorXd z(M);
      for (int j = 0; j < M; ++j)
        z(j) = standard_normal(gen);
      const Eigen::VectorXd s = chol_ * z;
      for (int j = 0; j < M; ++j)
        stats[static_cast<std::size_t>(j)] = null_mean_[static_cast<std::size_t>(j)] + s(j);
      return kernel_.decide(stats);
    }

    const double nu2 = nu_ * nu_;
    for (std::size_t i = 0; i < shells.size(); ++i) {
      const auto n = static_cast<double>(shells[i].multiplicity);
      if (a) {
        const double z = standard_normal(gen);
        const double centre = alpha * a->root_energy[i] + nu_ * z;
        q[i] = centre * centre + (n > 1.0 ? nu2 * chi_square(gen, n - 1.0) : 0.0);
      } else {
        q[i] = nu2 * chi_square(gen, n);
      }
    }
    kernel_.evaluate(q, stats);
    return kernel_.decide(stats);
  }

  int k_;
  NodeGrid grid_;
  StatisticKernel kernel_;
  LepskiScan scan_;
  double nu_;
  std::uint64_t total_;
  std::vector<double> slacks_;
  Sampler sampler_ = Sampler::shell;
  double beta_ = 0.0;
  double norm_ = 1.0;
  Lattice lattice_;
  std::vector<std::ptrdiff_t> lattice_shell_;
  Eigen::MatrixXd chol_;
  std::vector<double> null_mean_;
  std::map<std::uint64_t, ActiveSignal> actives_;
};

unsigned worker_count(int requested, int J)
{
  unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::max(1U, std::thread::hardware_concurrency());
  return std::min<unsigned>(n, static_cast<unsigned>(J));
}

RiskReport run_experiment(const ModelInstance& m, const std::optional<SubsetId>& scaled,
                          const std::vector<double>& alphas, const SelectorConfig& config, int J,
                          std::uint64_t seed, const SimulationOptions& options)
{
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  config.validate();
  require(J >= 1, ErrorCode::invalid_argument, "J must be >= 1");
  require(m.epsilon > 0.0, ErrorCode::invalid_argument, "risk estimation needs eps > 0 (use noise_scale 0 for noiseless data)");
  require(options.draw_budget >= 0.0, ErrorCode::invalid_argument, "draw budget must be >= 0");
  if (scaled) {
    require(m.is_active(*scaled), ErrorCode::unknown_subset, "subset " + scaled->to_string() + " is not active");
    require(!alphas.empty(), ErrorCode::invalid_argument, "alpha list is empty");
    for (double a : alphas)
      require(a > 0.0 && std::isfinite(a), ErrorCode::invalid_argument, "alpha must be positive");
  }

  const auto orders = m.orders();
  const bool aggregate = orders.size() > 1;
  const int s = aggregate ? static_cast<int>(orders.size()) : 0;
  std::vector<OrderEngine> engines;
  engines.reserve(orders.size());
  for (int k : orders) {
    try {
      engines.emplace_back(m, k, config, options.sampler, s, J, options.draw_budget);
    } catch (const Error& e) {
      if (!aggregate)
        throw;
      fail(e.code(), "order k=" + std::to_string(k) + ": " + e.detail());
    }
  }
  const std::size_t scaled_order = scaled ? static_cast<std::size_t>(scaled->size() - orders.front()) : 0;
  const std::optional<std::uint64_t> scaled_rank =
    scaled ? std::optional<std::uint64_t>(subset_rank(*scaled, m.d)) : std::nullopt;
  const std::size_t n_alpha = scaled ? alphas.size() : 1;

  // tallies[j][order]
  std::vector<std::vector<OrderTally>> tallies(static_cast<std::size_t>(J));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(J));
  auto work = [&](int begin, int end) {
    for (int j = begin; j < end; ++j) {
      const std::uint64_t rep_seed = replicate_seed(seed, static_cast<std::uint64_t>(j));
      try {
        auto& row = tallies[static_cast<std::size_t>(j)];
        for (std::size_t o = 0; o < engines.size(); ++o) {
          const bool here = scaled && o == scaled_order;
          row.push_back(engines[o].run(rep_seed, here ? scaled_rank : std::nullopt, alphas));
        }
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
  };
  const unsigned workers = worker_count(options.threads, J);
  if (workers <= 1) {
    work(0, J);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(J) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(J) * (w + 1) / workers);
      pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool)
      t.join();
  }
  for (int j = 0; j < J; ++j) {
    if (!errors[static_cast<std::size_t>(j)])
      continue;
    const std::uint64_t rep_seed = replicate_seed(seed, static_cast<std::uint64_t>(j));
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(j)]);
    } catch (const Error& e) {
      fail(e.code(), "replicate " + std::to_string(j) + " (seed " + std::to_string(rep_seed) + "): " + e.detail());
    }
  }

  std::string sampler_name;
  for (std::size_t o = 0; o < engines.size(); ++o)
    sampler_name += (o ? "," : "") + to_string(engines[o].sampler());

  RiskReport report;
  for (std::size_t i = 0; i < n_alpha; ++i) {
    RiskRow row;
    row.d = m.d;
    row.k = aggregate ? orders.back() : orders.front();
    row.aggregate = aggregate;
    row.alpha = scaled ? alphas[i] : 1.0;
    row.beta = aggregate ? 0.0 : engines.front().beta();
    row.J = J;
    row.seed = seed;
    row.sampler = sampler_name;
    std::vector<double> errs;
    for (int j = 0; j < J; ++j) {
      double e = 0.0;
      for (std::size_t o = 0; o < engines.size(); ++o) {
        const auto& t = tallies[static_cast<std::size_t>(j)][o];
        const std::size_t idx = t.m_hat.size() > 1 ? i : 0;
        const auto fp = static_cast<double>(t.false_pos[idx]);
        const auto fn = static_cast<double>(t.false_neg[idx]);
        e += engines[o].norm() * (fp + fn);
        row.false_pos += fp;
        row.false_neg += fn;
        if (!aggregate)
          row.m_hat.push_back(t.m_hat[idx]);
      }
      errs.push_back(e);
    }
    double mean = 0.0;
    for (double e : errs)
      mean += e;
    mean /= J;
    double var = 0.0;
    for (double e : errs)
      var += (e - mean) * (e - mean);
    row.err = mean;
    row.err_sd = J > 1 ? std::sqrt(var / (J - 1)) : 0.0;
    row.false_pos /= J;
    row.false_neg /= J;
    report.rows.push_back(std::move(row));
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : report.rows)
    r.wall_time = report.wall_time / static_cast<double>(report.rows.size());
  return report;
}

std::string format_fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_short(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace

std::string RiskReport::to_json(bool include_timing) const
{
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  auto& rows_json = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["d"] = r.d;
    o[r.aggregate ? "s" : "k"] = r.k;
    o["aggregate"] = r.aggregate;
    o["alpha"] = r.alpha;
    if (!r.label.empty())
      o["label"] = r.label;
    if (!r.aggregate)
      o["beta"] = r.beta;
    o["err"] = r.err;
    o["err_sd"] = r.err_sd;
    o["false_pos"] = r.false_pos;
    o["false_neg"] = r.false_neg;
    o["J"] = r.J;
    o["seed"] = r.seed;
    o["sampler"] = r.sampler;
    if (!r.m_hat.empty())
      o["m_hat"] = r.m_hat;
    if (include_timing)
      o["wall_time"] = r.wall_time;
    rows_json.push_back(std::move(o));
  }
  if (include_timing)
    j["wall_time"] = wall_time;
  return j.dump(2) + "\n";
}

std::string RiskReport::table2_csv() const
{
  std::vector<double> alphas;
  std::vector<std::pair<int, int>> keys;  // (k, d) in first-seen order
  for (const auto& r : rows) {
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end())
      alphas.push_back(r.alpha);
    if (std::find(keys.begin(), keys.end(), std::pair{r.k, r.d}) == keys.end())
      keys.emplace_back(r.k, r.d);
  }
  std::ostringstream os;
  os << "k,d,beta";
  for (double a : alphas)
    os << ',' << format_short(a);
  os << '\n';
  for (const auto& [k, d] : keys) {
    const RiskRow* first = nullptr;
    for (const auto& r : rows)
      if (r.k == k && r.d == d) {
        first = &r;
        break;
      }
    os << k << ',' << d << ',' << format_fixed(first->beta, 4);
    for (double a : alphas) {
      os << ',';
      for (const auto& r : rows)
        if (r.k == k && r.d == d && r.alpha == a) {
          os << format_fixed(r.err, 4);
          break;
        }
    }
    os << '\n';
  }
  return os.str();
}

std::string RiskReport::rows_csv() const
{
  std::ostringstream os;
  os << "d,k,aggregate,alpha,label,beta,err,err_sd,false_pos,false_neg,J,seed,sampler\n";
  for (const auto& r : rows)
    os << r.d << ',' << r.k << ',' << (r.aggregate ? 1 : 0) << ',' << format_short(r.alpha) << ',' << r.label << ','
       << format_fixed(r.beta, 4) << ',' << format_fixed(r.err, 4) << ',' << format_fixed(r.err_sd, 4) << ','
       << format_short(r.false_pos) << ',' << format_short(r.false_neg) << ',' << r.J << ',' << r.seed << ",\""
       << r.sampler << "\"\n";
  return os.str();
}

RiskReport estimate_risk(const ModelInstance& m, const SelectorConfig& config, int J, std::uint64_t seed,
                         const SimulationOptions& options)
{
  return run_experiment(m, std::nullopt, {}, config, J, seed, options);
}

RiskReport estimate_risk_sweep(const ModelInstance& m, const SubsetId& u, const std::vector<double>& alphas,
                               const SelectorConfig& config, int J, std::uint64_t seed,
                               const SimulationOptions& options)
{
  return run_experiment(m, u, alphas, config, J, seed, options);
}

std::string to_string(Phase p)
{
  switch (p) {
  case Phase::exact: return "exact";
  case Phase::almost_full: return "almost-full";
  case Phase::none: return "none";
  case Phase::boundary: return "boundary";
  }
  return "?";
}

Phase phase_classify(double beta, double gamma)
{
  require(beta > 0.0 && beta < 1.0, ErrorCode::domain_error, "beta must lie in (0, 1)");
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::domain_error, "gamma must be positive");
  const double exact = (1.0 + std::sqrt(1.0 - beta)) * (1.0 + std::sqrt(1.0 - beta));
  if (gamma == exact || gamma == beta)
    return Phase::boundary;
  if (gamma > exact)
    return Phase::exact;
  if (gamma > beta)
    return Phase::almost_full;
  return Phase::none;
}

std::vector<BoundaryPoint> boundary_curves(std::span<const double> betas)
{
  std::vector<BoundaryPoint> out;
  out.reserve(betas.size());
  for (double b : betas) {
    require(b > 0.0 && b < 1.0, ErrorCode::domain_error, "boundary grid must lie inside (0, 1)");
    const double root = 1.0 + std::sqrt(1.0 - b);
    out.push_back({b, b, root * root});
  }
  return out;
}

std::uint64_t dichotomy_active_count(int d, int k, double beta)
{
  require(beta > 0.0 && beta < 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1)");
  const double n = std::floor(std::exp((1.0 - beta) * log_binomial(d, k)) + 1e-9);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

ModelInstance dichotomy_instance(int k, double sigma, double eps, int d, double beta, double margin,
                                 std::optional<int> window)
{
  require(margin != 0.0 && std::abs(margin) <= 0.5, ErrorCode::invalid_argument, "|margin| must lie in (0, 0.5]");
  require(k >= 1 && k < d, ErrorCode::invalid_argument, "dichotomy needs 1 <= k < d");
  const std::uint64_t count = dichotomy_active_count(d, k, beta);
  require(count < binomial(d, k), ErrorCode::invalid_argument, "beta leaves no inactive subsets");

  const double target = (1.0 + margin) * std::sqrt(2.0 * beta * log_binomial(d, k));
  ExtremalSolver solver(k, sigma, window);
  const double r = solver.r_star(eps, target);
  const ExtremalProfile profile = solver.solve(eps, r);
  std::map<FrequencyVector, double> table;
  for (const auto& l : profile.support())
    table.emplace(l, std::sqrt(profile.theta_sq_for_norm2(l.norm2())));

  ModelInstance m;
  m.d = d;
  m.k_min = m.k_max = k;
  m.sigma = sigma;
  m.epsilon = eps;
  if (window)
    m.windows[k] = *window;
  std::uint64_t placed = 0;
  for (const SubsetId& u : enumerate_subsets(d, k)) {
    if (placed++ == count)
      break;
    m.active.emplace(u, ComponentSpec::table(u, table));
  }
  m.validate();
  return m;
}

RiskReport boundary_dichotomy_experiment(int k, double sigma, double eps, int d, double beta, double margin,
                                         int J, std::uint64_t seed, const SelectorConfig& config,
                                         const SimulationOptions& options)
{
  const ModelInstance m = dichotomy_instance(k, sigma, eps, d, beta, margin);
  RiskReport report = estimate_risk(m, config, J, seed, options);
  char label[32];
  std::snprintf(label, sizeof label, "margin=%+.2f", margin);
  for (auto& r : report.rows)
    r.label = label;
  return report;
}

} // namespace sparse_anova
