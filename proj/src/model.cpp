#include "sparse_anova/model.hpp"

#include "sparse_anova/errors.hpp"
#include "sparse_anova/extremal.hpp"
#include "sparse_anova/rng.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace sparse_anova {

namespace {

double g1(double t) { return t * t * (std::exp2(t - 1.0) - (t - 0.5) * (t - 0.5)) * std::exp(t) - 0.5424; }
double g2(double t) { return t * t * (std::exp2(t - 1.0) - std::pow(t - 1.0, 5)) - 0.2887; }
double g3(double t) { return 0.1 * (15.0 * t * t * std::exp2(t - 1.0) * std::cos(15.0 * t) - 0.5011); }
double g4(double t) { return t - 0.5; }
double g5(double t) { return 5.0 * std::pow(t - 0.7, 3) + 0.29; }
double g6(double t) { return 2.0 * (t - 0.4) * (t - 0.4) - 0.1867; }
double g7(double t) { return 0.7 * std::pow(t * t - 0.1, 3) - 0.0643; }
double g8(double t) { return 10.0 * std::pow(t * t - 0.5, 5) + 0.068; }

constexpr double (*kFamily[])(double) = {g1, g2, g3, g4, g5, g6, g7, g8};

//! Each Simpson panel spans two of the P uniform subintervals.
constexpr int kSubintervals = 2 * kQuadraturePanels;

//! g(t_i) times the composite Simpson weight, t_i = i / P.
std::vector<double> simpson_samples(const UnivariateGenerator& g)
{
  constexpr int P = kSubintervals;
  const double h = 1.0 / P;
  std::vector<double> w(P + 1);
  for (int i = 0; i <= P; ++i) {
    const double c = (i == 0 || i == P) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(i)] = c * h / 3.0 * g(static_cast<double>(i) * h);
  }
  return w;
}

struct TrigTable {
  std::vector<double> cos, sin;
  TrigTable()
    : cos(kSubintervals)
    , sin(kSubintervals)
  {
    for (int j = 0; j < kSubintervals; ++j) {
      const double x = 2.0 * std::numbers::pi * j / kSubintervals;
      cos[static_cast<std::size_t>(j)] = std::cos(x);
      sin[static_cast<std::size_t>(j)] = std::sin(x);
    }
  }
};

FourierCoefficients compute_fourier(const UnivariateGenerator& g, int n_max)
{
  static const TrigTable trig;
  constexpr std::uint64_t mask = kSubintervals - 1;
  const std::vector<double> w = simpson_samples(g);
  std::vector<double> values(static_cast<std::size_t>(2 * n_max + 1), 0.0);
  for (int l = 1; l <= n_max; ++l) {
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t j = (static_cast<std::uint64_t>(l) * i) & mask;
      c += w[i] * trig.cos[j];
      s += w[i] * trig.sin[j];
    }
    values[static_cast<std::size_t>(n_max + l)] = std::numbers::sqrt2 * c;
    values[static_cast<std::size_t>(n_max - l)] = std::numbers::sqrt2 * s;
  }
  return FourierCoefficients(n_max, std::move(values));
}

bool builtin_id(const std::string& id)
{
  return id.size() == 2 && id[0] == 'g' && id[1] >= '1' && id[1] <= '8';
}

//! Sum over positive tuples (p_1..p_k), sum p^2 = s <= smax, of prod_j e_j(p_j),
//! where e_j(p) holds the paired energy of factor j; dense in s.
std::vector<double> convolve_energy(const std::vector<std::vector<double>>& per_coord, std::int64_t smax)
{
  const std::size_t k = per_coord.size();
  std::vector<double> cur(static_cast<std::size_t>(smax + 1), 0.0), next(cur.size());
  cur[0] = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::int64_t reserve = static_cast<std::int64_t>(k - j - 1);
    const auto& e = per_coord[j];
    for (std::int64_t s = 0; s <= smax; ++s) {
      const double base = cur[static_cast<std::size_t>(s)];
      if (base == 0.0)
        continue;
      for (std::size_t p = 1; p <= e.size(); ++p) {
        const std::int64_t t = s + static_cast<std::int64_t>(p * p);
        if (t + reserve > smax)
          break;
        next[static_cast<std::size_t>(t)] += base * e[p - 1];
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

} // namespace

UnivariateGenerator test_function(int i)
{
  require(i >= 1 && i <= 8, ErrorCode::invalid_argument, "test functions are g1..g8, got g" + std::to_string(i));
  return {"g" + std::to_string(i), kFamily[i - 1]};
}

UnivariateGenerator test_function(const std::string& id)
{
  require(builtin_id(id), ErrorCode::invalid_argument, "unknown test function '" + id + "'");
  return test_function(id[1] - '0');
}

double generator_mean(const UnivariateGenerator& g)
{
  const std::vector<double> w = simpson_samples(g);
  double s = 0.0;
  for (double v : w)
    s += v;
  return s;
}

FourierCoefficients::FourierCoefficients(int n_max, std::vector<double> values)
  : n_max_(n_max)
  , values_(std::move(values))
{
  require(n_max >= 0 && values_.size() == static_cast<std::size_t>(2 * n_max + 1),
          ErrorCode::dimension_mismatch, "Fourier table has the wrong length");
}

double FourierCoefficients::operator[](int l) const
{
  if (l == 0 || l > n_max_ || l < -n_max_)
    return 0.0;
  return values_[static_cast<std::size_t>(l + n_max_)];
}

std::vector<double> FourierCoefficients::paired_energy() const
{
  std::vector<double> e(static_cast<std::size_t>(n_max_));
  for (int p = 1; p <= n_max_; ++p) {
    const double a = (*this)[p], b = (*this)[-p];
    e[static_cast<std::size_t>(p - 1)] = a * a + b * b;
  }
  return e;
}

double FourierCoefficients::energy() const
{
  double s = 0.0;
  for (double e : paired_energy())
    s += e;
  return s;
}

FourierCoefficients fourier_1d(const UnivariateGenerator& g, int n_max)
{
  require(n_max >= 1, ErrorCode::invalid_argument, "n_max must be >= 1");
  if (!builtin_id(g.id))
    return compute_fourier(g, n_max);

  // The built-in family is reused across components; cache the largest table.
  static std::mutex mutex;
  static std::map<std::string, FourierCoefficients> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(g.id);
    if (it != cache.end() && it->second.n_max() >= n_max) {
      std::vector<double> v(static_cast<std::size_t>(2 * n_max + 1));
      for (int l = -n_max; l <= n_max; ++l)
        v[static_cast<std::size_t>(l + n_max)] = it->second[l];
      return FourierCoefficients(n_max, std::move(v));
    }
  }
  FourierCoefficients fc = compute_fourier(g, n_max);
  std::lock_guard lock(mutex);
  auto& slot = cache[g.id];
  if (slot.n_max() < n_max)
    slot = fc;
  return fc;
}

ComponentSpec ComponentSpec::product(SubsetId subset, std::vector<UnivariateGenerator> factors)
{
  require(static_cast<int>(factors.size()) == subset.size(), ErrorCode::dimension_mismatch,
          "component " + subset.to_string() + " needs one factor per coordinate");
  for (const auto& f : factors)
    require(static_cast<bool>(f.eval), ErrorCode::invalid_argument, "factor '" + f.id + "' has no evaluator");
  ComponentSpec c;
  c.subset = std::move(subset);
  c.factors = std::move(factors);
  return c;
}

ComponentSpec ComponentSpec::table(SubsetId subset, std::map<FrequencyVector, double> coefficients)
{
  for (const auto& [l, v] : coefficients)
    require(l.size() == subset.size(), ErrorCode::dimension_mismatch,
            "coefficient frequency length differs from subset " + subset.to_string());
  ComponentSpec c;
  c.subset = std::move(subset);
  c.coefficients = std::move(coefficients);
  return c;
}

std::vector<double> component_coefficients(const ComponentSpec& c, const Lattice& support)
{
  const int k = c.order();
  int n_max = 1;
  for (const auto& l : support) {
    require(l.size() == k, ErrorCode::dimension_mismatch,
            "frequency of length " + std::to_string(l.size()) + " for subset " + c.subset.to_string());
    for (int v : l.entries())
      n_max = std::max(n_max, std::abs(v));
  }
  std::vector<double> out(support.size(), 0.0);
  if (c.is_product()) {
    std::vector<FourierCoefficients> fc;
    for (const auto& f : c.factors)
      fc.push_back(fourier_1d(f, n_max));
    for (std::size_t i = 0; i < support.size(); ++i) {
      double v = 1.0;
      for (int j = 0; j < k; ++j)
        v *= fc[static_cast<std::size_t>(j)][support[i][j]];
      out[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < support.size(); ++i) {
      auto it = c.coefficients.find(support[i]);
      if (it != c.coefficients.end())
        out[i] = it->second;
    }
  }
  return out;
}

std::vector<double> component_shell_energy(const ComponentSpec& c, const std::vector<Shell>& shells,
                                           std::optional<int> window)
{
  std::vector<double> out(shells.size(), 0.0);
  if (shells.empty())
    return out;
  const std::int64_t smax = shells.back().norm2;
  if (c.is_product()) {
    int n = static_cast<int>(std::floor(std::sqrt(static_cast<double>(smax))));
    if (window)
      n = std::min(n, *window);
    n = std::max(n, 1);
    std::vector<std::vector<double>> per_coord;
    for (const auto& f : c.factors)
      per_coord.push_back(fourier_1d(f, n).paired_energy());
    const std::vector<double> dense = convolve_energy(per_coord, smax);
    for (std::size_t i = 0; i < shells.size(); ++i)
      out[i] = dense[static_cast<std::size_t>(shells[i].norm2)];
  } else {
    for (const auto& [l, v] : c.coefficients) {
      if (window && std::any_of(l.entries().begin(), l.entries().end(),
                                [&](int e) { return std::abs(e) > *window; }))
        continue;
      const std::int64_t s = l.norm2();
      auto it = std::lower_bound(shells.begin(), shells.end(), s,
                                 [](const Shell& sh, std::int64_t v2) { return sh.norm2 < v2; });
      if (it != shells.end() && it->norm2 == s)
        out[static_cast<std::size_t>(it - shells.begin())] += v * v;
    }
  }
  return out;
}

ComponentDiagnostics diagnostics(const ComponentSpec& c, double sigma, double eps, int d, double beta,
                                 int window)
{
  require(sigma > 0.0 && eps > 0.0, ErrorCode::invalid_argument, "sigma and eps must be positive");
  require(beta > 0.0 && beta <= 1.0, ErrorCode::invalid_argument, "beta must lie in (0, 1]");
  require(window >= 1, ErrorCode::invalid_argument, "window must be >= 1");
  const int k = c.order();
  require(k <= d, ErrorCode::invalid_argument, "component order exceeds d");

  ComponentDiagnostics out;
  long double l2 = 0, sob = 0;
  std::optional<int> lattice_window;
  if (c.is_product()) {
    lattice_window = window;
    const auto shells = shell_spectrum(k, std::sqrt(static_cast<double>(k)) * window + 1.0, window);
    const auto energy = component_shell_energy(c, shells, window);
    for (std::size_t i = 0; i < shells.size(); ++i) {
      l2 += energy[i];
      sob += energy[i] * smoothness_from_norm2(shells[i].norm2, sigma);
    }
    for (const auto& f : c.factors)
      out.factor_means.push_back(generator_mean(f));
  } else {
    for (const auto& [l, v] : c.coefficients) {
      l2 += static_cast<long double>(v) * v;
      sob += static_cast<long double>(v) * v * smoothness_from_norm2(l.norm2(), sigma);
    }
  }
  out.l2_norm = std::sqrt(static_cast<double>(l2));
  out.sobolev_seminorm = std::sqrt(static_cast<double>(sob));
  if (out.l2_norm > 0.0)
    out.boundary_ratio = a_value(k, sigma, eps, out.l2_norm, lattice_window) /
                         std::sqrt(2.0 * beta * log_binomial(d, k));
  return out;
}

std::vector<int> ModelInstance::orders() const
{
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k)
    ks.push_back(k);
  return ks;
}

std::optional<int> ModelInstance::window(int k) const
{
  auto it = windows.find(k);
  if (it == windows.end())
    return std::nullopt;
  return it->second;
}

double ModelInstance::alpha_of(const SubsetId& u) const
{
  auto it = alpha.find(u);
  return it == alpha.end() ? 1.0 : it->second;
}

int ModelInstance::active_count(int k) const
{
  return static_cast<int>(std::count_if(active.begin(), active.end(),
                                        [k](const auto& kv) { return kv.first.size() == k; }));
}

double ModelInstance::beta(int k) const
{
  const int n = active_count(k);
  if (n == 0)
    return 1.0;
  return 1.0 - std::log(static_cast<double>(n)) / log_binomial(d, k);
}

void ModelInstance::validate() const
{
  require(d >= 1, ErrorCode::invalid_argument, "d must be >= 1");
  require(k_min >= 1 && k_min <= k_max && k_max <= d, ErrorCode::invalid_argument,
          "orders must satisfy 1 <= k_min <= k_max <= d");
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorCode::invalid_argument, "epsilon must be >= 0");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale), ErrorCode::invalid_argument,
          "noise_scale must be >= 0");
  for (const auto& [u, spec] : active) {
    require(u == spec.subset, ErrorCode::invalid_argument, "active key " + u.to_string() + " differs from its spec");
    require(u.size() >= k_min && u.size() <= k_max, ErrorCode::invalid_argument,
            "active subset " + u.to_string() + " has order outside k_min..k_max");
    require(u.back() <= d, ErrorCode::invalid_argument, "active subset " + u.to_string() + " exceeds d");
    require(!spec.is_product() || static_cast<int>(spec.factors.size()) == u.size(),
            ErrorCode::dimension_mismatch, "component " + u.to_string() + " needs one factor per coordinate");
  }
  for (const auto& [u, a] : alpha) {
    require(is_active(u), ErrorCode::unknown_subset, "alpha given for inactive subset " + u.to_string());
    require(a > 0.0 && std::isfinite(a), ErrorCode::invalid_argument, "alpha must be positive");
  }
  for (const auto& [k, n] : windows)
    require(k >= 1 && n >= 1, ErrorCode::invalid_argument, "lattice windows must be >= 1");
  for (int k : orders()) {
    const int n = active_count(k);
    require(static_cast<std::uint64_t>(n) < binomial(d, k) || n == 0, ErrorCode::invalid_argument,
            "every subset of order " + std::to_string(k) + " is active; beta would be 0");
  }
}

std::optional<int> design_lattice_window(int k)
{
  if (k == 2)
    return 344;
  if (k == 3)
    return 127;
  return std::nullopt;
}

SubsetId design_scaled_subset(int k)
{
  require(k == 2 || k == 3, ErrorCode::invalid_argument, "the six-component design exists for k = 2, 3");
  return k == 2 ? SubsetId{1, 2} : SubsetId{1, 2, 3};
}

ModelInstance design_instance(int k, int d, double sigma, double eps)
{
  require(k == 2 || k == 3, ErrorCode::invalid_argument, "the six-component design exists for k = 2, 3");
  require(d >= k + 6, ErrorCode::invalid_argument,
          "the six-component design needs d >= " + std::to_string(k + 6));
  ModelInstance m;
  m.d = d;
  m.k_min = m.k_max = k;
  m.sigma = sigma;
  m.epsilon = eps;
  m.windows[k] = *design_lattice_window(k);
  for (int i = k; i < k + 6; ++i) {
    std::vector<int> coords;
    std::vector<UnivariateGenerator> factors;
    for (int j = 1; j < k; ++j) {
      coords.push_back(j);
      factors.push_back(test_function(j));
    }
    coords.push_back(i);
    factors.push_back(test_function(i));
    SubsetId u(std::move(coords));
    m.active.emplace(u, ComponentSpec::product(u, std::move(factors)));
  }
  m.validate();
  return m;
}

ModelInstance design_aggregate_instance(int s, int d, double sigma, double eps)
{
  require(s >= 1 && s < d, ErrorCode::invalid_argument, "aggregate needs 1 <= s < d");
  ModelInstance m;
  m.d = d;
  m.k_min = 1;
  m.k_max = s;
  m.sigma = sigma;
  m.epsilon = eps;
  for (int k = 2; k <= std::min(s, 3); ++k) {
    const ModelInstance part = design_instance(k, d, sigma, eps);
    m.active.insert(part.active.begin(), part.active.end());
    m.windows.insert(part.windows.begin(), part.windows.end());
  }
  m.validate();
  return m;
}

ModelInstance scale_signal(const ModelInstance& m, const SubsetId& u, double alpha)
{
  require(m.is_active(u), ErrorCode::unknown_subset, "subset " + u.to_string() + " is not active");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_argument, "alpha must be positive");
  ModelInstance out = m;
  out.alpha[u] = alpha;
  return out;
}

std::uint64_t frequency_key(std::uint64_t seed, int k, std::uint64_t rank, const FrequencyVector& l)
{
  std::uint64_t h = stream_key({seed, static_cast<std::uint64_t>(k), rank});
  for (int v : l.entries())
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  return h;
}

std::map<SubsetId, std::vector<double>> sample_data(const ModelInstance& m,
                                                    const std::map<SubsetId, Lattice>& supports,
                                                    std::uint64_t seed)
{
  m.validate();
  std::map<SubsetId, std::vector<double>> out;
  for (const auto& [u, lattice] : supports) {
    require(u.back() <= m.d, ErrorCode::invalid_argument, "subset " + u.to_string() + " exceeds d");
    const int k = u.size();
    const std::uint64_t rank = subset_rank(u, m.d);
    std::vector<double> x(lattice.size(), 0.0);
    if (auto it = m.active.find(u); it != m.active.end()) {
      x = component_coefficients(it->second, lattice);
      const double a = m.alpha_of(u);
      for (double& v : x)
        v *= a;
    }
    const double noise = m.epsilon * m.noise_scale;
    if (noise > 0.0) {
      for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (lattice[i].size() != k)
          fail(ErrorCode::dimension_mismatch, "frequency length differs from subset " + u.to_string());
        SplitMix64 gen(frequency_key(seed, k, rank, lattice[i]));
        x[i] += noise * standard_normal(gen);
      }
    }
    out.emplace(u, std::move(x));
  }
  return out;
}

} // namespace sparse_anova
