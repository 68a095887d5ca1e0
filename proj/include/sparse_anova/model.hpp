#pragma once

#include "sparse_anova/combinatorics.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparse_anova {

//! A real function on [0, 1] used as one factor of a product component.
struct UnivariateGenerator {
  std::string id;  ///< "g1".."g8" for the built-in family, anything else for custom
  std::function<double(double)> eval;

  double operator()(double t) const { return eval(t); }
};

//! Built-in test function g_i, i = 1..8.
UnivariateGenerator test_function(int i);
//! Lookup by id ("g1".."g8"); throws invalid-argument for other names.
UnivariateGenerator test_function(const std::string& id);

//! Quadrature of the integral of g over [0, 1] (composite Simpson).
double generator_mean(const UnivariateGenerator& g);

//! Coefficients theta_l = int g phi_l for l in {-n..-1, 1..n}, where
//! phi_l = sqrt(2) cos(2 pi l t) for l > 0 and sqrt(2) sin(2 pi |l| t) for l < 0.
class FourierCoefficients {
public:
  FourierCoefficients() = default;
  FourierCoefficients(int n_max, std::vector<double> values);

  int n_max() const noexcept { return n_max_; }
  //! theta_l; zero for |l| > n_max.
  double operator[](int l) const;
  //! theta_p^2 + theta_{-p}^2 for p = 1..n_max (index p - 1).
  std::vector<double> paired_energy() const;
  double energy() const;

private:
  int n_max_ = 0;
  std::vector<double> values_;  ///< index l + n_max, entry n_max unused
};

//! Number of composite Simpson panels on [0, 1] (two subintervals each).
inline constexpr int kQuadraturePanels = 1 << 14;

FourierCoefficients fourier_1d(const UnivariateGenerator& g, int n_max);

//! One k-variate component: either a tensor product of univariate factors or
//! an explicit table of coefficients (absent frequencies are zero).
struct ComponentSpec {
  SubsetId subset;
  std::vector<UnivariateGenerator> factors;
  std::map<FrequencyVector, double> coefficients;

  static ComponentSpec product(SubsetId subset, std::vector<UnivariateGenerator> factors);
  static ComponentSpec table(SubsetId subset, std::map<FrequencyVector, double> coefficients);

  bool is_product() const noexcept { return !factors.empty(); }
  int order() const noexcept { return subset.size(); }
};

//! theta_l(u) for each frequency of `support`, in the same order.
std::vector<double> component_coefficients(const ComponentSpec& c, const Lattice& support);

//! Sum of theta_l^2 over each shell in `shells` (same order), restricted to
//! |l_j| <= window for product components.
std::vector<double> component_shell_energy(const ComponentSpec& c, const std::vector<Shell>& shells,
                                           std::optional<int> window);

struct ComponentDiagnostics {
  double l2_norm = 0.0;
  double sobolev_seminorm = 0.0;
  //! a(l2_norm) / sqrt(2 beta log binom(d, k)); above 1 means selectable.
  double boundary_ratio = 0.0;
  std::vector<double> factor_means;  ///< residual integral of each factor
};

//! Norms over the lattice |l_j| <= window (product form needs a window).
ComponentDiagnostics diagnostics(const ComponentSpec& c, double sigma, double eps, int d, double beta,
                                 int window);

//! Full description of one experiment in sequence space.
struct ModelInstance {
  int d = 0;
  int k_min = 1;  ///< orders present: k_min..k_max
  int k_max = 1;
  double sigma = 1.0;
  double epsilon = 1e-4;
  //! Multiplies the noise in simulations; 0 gives noiseless data while the
  //! selector stays calibrated at `epsilon`.
  double noise_scale = 1.0;
  std::map<SubsetId, ComponentSpec> active;
  std::map<SubsetId, double> alpha;  ///< signal scale per active subset, default 1
  std::map<int, int> windows;        ///< lattice truncation |l_j| <= n per order

  std::vector<int> orders() const;
  std::optional<int> window(int k) const;
  double alpha_of(const SubsetId& u) const;
  bool is_active(const SubsetId& u) const { return active.count(u) != 0; }
  int active_count(int k) const;
  //! 1 - log(#active of order k) / log binom(d, k); 1 when order k has no actives.
  double beta(int k) const;
  //! Throws invalid-argument describing the first violated constraint.
  void validate() const;
};

//! Lattice window n used by the simulation design: 344 for k = 2, 127 for k = 3.
std::optional<int> design_lattice_window(int k);

//! The six-component design: k = 2 uses {1,i} with g1 x g_i, i = 2..7;
//! k = 3 uses {1,2,i} with g1 x g2 x g_i, i = 3..8.
ModelInstance design_instance(int k, int d, double sigma = 1.0, double eps = 1e-4);

//! Orders 1..s in one instance, carrying the six-component design of every
//! order among 2 and 3 that is <= s (other orders have no actives).
ModelInstance design_aggregate_instance(int s, int d, double sigma = 1.0, double eps = 1e-4);

//! The subset whose signal is scaled in the alpha sweep: {1,2} or {1,2,3}.
SubsetId design_scaled_subset(int k);

ModelInstance scale_signal(const ModelInstance& m, const SubsetId& u, double alpha);

//! Key of the normal variate xi_l for subset rank `rank` and frequency l;
//! depends on l itself so that different supports see the same noise.
std::uint64_t frequency_key(std::uint64_t seed, int k, std::uint64_t rank, const FrequencyVector& l);

//! X_l = alpha theta_l [u active] + eps xi_l for every frequency of every
//! listed support. Output vectors follow the support order.
std::map<SubsetId, std::vector<double>> sample_data(const ModelInstance& m,
                                                    const std::map<SubsetId, Lattice>& supports,
                                                    std::uint64_t seed);

} // namespace sparse_anova
