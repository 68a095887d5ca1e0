#pragma once

#include "sparse_anova/combinatorics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sparse_anova {

/// Solution of the extremal problem
///
///   a^2(r) = (1 / (2 eps^4)) inf { sum theta_l^4 : sum theta_l^2 c_l^2 <= 1,
///                                                  sum theta_l^2 >= r^2 }
///
/// over the frequencies of one k-subset. The minimiser has the water-filling
/// form theta_l^2 = A (1 - mu c_l^2)_+, so it is constant on shells of equal
/// |l|^2 and the profile is stored per shell.
struct ExtremalProfile {
  int k = 0;
  double sigma = 0.0;
  double epsilon = 0.0;
  double r = 0.0;
  std::optional<int> window;

  std::vector<Shell> shells;     ///< support shells, increasing norm2
  std::vector<double> theta_sq;  ///< theta*_l^2 on each support shell
  std::vector<double> weights;   ///< omega_l = theta*_l^2 / (2 eps^2 a)

  double a_value = 0.0;
  double amplitude = 0.0;  ///< A
  double mu = 0.0;         ///< 0 only when a window leaves the ellipsoid slack

  std::int64_t support_size() const noexcept;
  double max_weight() const noexcept;
  double weight_for_norm2(std::int64_t norm2) const noexcept;
  double theta_sq_for_norm2(std::int64_t norm2) const noexcept;
  //! Smallest radius R with every support frequency satisfying |l| < R.
  double support_radius() const noexcept;
  //! Support frequencies in lexicographic order.
  Lattice support() const;
};

//! Residuals of the defining constraints; all should be ~0.
struct ProfileResiduals {
  double l2_relative = 0.0;        ///< |sum theta^2 - r^2| / r^2
  double ellipsoid_excess = 0.0;   ///< max(0, sum theta^2 c^2 - 1)
  double a_relative = 0.0;         ///< |a^2 - sum theta^4 / (2 eps^4)| / a^2
  double weight_norm = 0.0;        ///< |sum omega^2 - 1/2|
};

ProfileResiduals check_profile(const ExtremalProfile& profile);

//! Upper end (2 pi)^(-sigma) k^(-sigma/2) of the admissible radius interval.
double max_radius(int k, double sigma);

//! Asymptotic support radius (1 + 4 sigma / k)^(1/(2 sigma)) / (2 pi r^(1/sigma)).
double asymptotic_support_radius(int k, double sigma, double r);

enum class AsymptoticRegime { fixed_k, growing_k };

//! C(sigma, k) of the fixed-k sharp asymptotics a ~ C r^(2 + k/(2 sigma)) / eps^2.
double asymptotic_constant(double sigma, int k);
double a_asymptotic(int k, double sigma, double eps, double r,
                    AsymptoticRegime regime = AsymptoticRegime::fixed_k);

//! Exact water-filling solver for a fixed (k, sigma, window). Keeps the shell
//! spectrum and its prefix sums between calls, growing them on demand, so
//! repeated solves (root finding on r) are O(log #shells) each apart from the
//! final profile materialisation.
class ExtremalSolver {
public:
  ExtremalSolver(int k, double sigma, std::optional<int> window = std::nullopt);

  ExtremalProfile solve(double eps, double r);
  double a_value(double eps, double r);
  //! r* with a(r*) = target, to 1e-6 relative in a.
  double r_star(double eps, double target);

  int k() const noexcept { return k_; }
  double sigma() const noexcept { return sigma_; }
  const std::optional<int>& window() const noexcept { return window_; }

private:
  struct Bracket {
    std::size_t support = 0;  ///< number of support shells
    double mu = 0.0;
  };

  void grow_to(double radius);
  Bracket bracket(double r);
  double a_unit(double r);  ///< a at eps = 1

  int k_;
  double sigma_;
  std::optional<int> window_;
  double radius_ = 0.0;
  bool saturated_ = false;  ///< spectrum already covers the whole window

  std::vector<Shell> shells_;
  std::vector<double> c2_;
  std::vector<double> n_prefix_, c_prefix_, d_prefix_;  ///< sums of n, n c^2, n c^4
};

ExtremalProfile solve_extremal(int k, double sigma, double eps, double r,
                               std::optional<int> window = std::nullopt);
double a_value(int k, double sigma, double eps, double r,
               std::optional<int> window = std::nullopt);
double solve_r_star(int k, double sigma, double eps, double target,
                    std::optional<int> window = std::nullopt);

} // namespace sparse_anova
