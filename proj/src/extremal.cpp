#include "sparse_anova/extremal.hpp"

#include "sparse_anova/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sparse_anova {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Spectra beyond this squared radius would need gigabytes of shell counts.
// One-dimensional spectra are listed directly and allow far larger radii.
constexpr double kMaxNorm2 = 4.0e7;
constexpr double kMaxNorm2Line = 1.0e12;

std::string describe(int k, double sigma, double r)
{
  std::ostringstream os;
  os.precision(17);
  os << "k=" << k << " sigma=" << sigma << " r=" << r;
  return os.str();
}

} // namespace

std::int64_t ExtremalProfile::support_size() const noexcept
{
  std::int64_t n = 0;
  for (const Shell& s : shells)
    n += s.multiplicity;
  return n;
}

double ExtremalProfile::max_weight() const noexcept
{
  return weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
}

namespace {

std::ptrdiff_t find_shell(const std::vector<Shell>& shells, std::int64_t norm2)
{
  auto it = std::lower_bound(shells.begin(), shells.end(), norm2,
                             [](const Shell& s, std::int64_t v) { return s.norm2 < v; });
  if (it == shells.end() || it->norm2 != norm2)
    return -1;
  return it - shells.begin();
}

} // namespace

double ExtremalProfile::weight_for_norm2(std::int64_t norm2) const noexcept
{
  const auto i = find_shell(shells, norm2);
  return i < 0 ? 0.0 : weights[static_cast<std::size_t>(i)];
}

double ExtremalProfile::theta_sq_for_norm2(std::int64_t norm2) const noexcept
{
  const auto i = find_shell(shells, norm2);
  return i < 0 ? 0.0 : theta_sq[static_cast<std::size_t>(i)];
}

double ExtremalProfile::support_radius() const noexcept
{
  if (shells.empty())
    return 0.0;
  return std::sqrt(static_cast<double>(shells.back().norm2) + 0.5);
}

Lattice ExtremalProfile::support() const
{
  if (shells.empty())
    return {};
  return enumerate_frequencies(k, support_radius(), window);
}

ProfileResiduals check_profile(const ExtremalProfile& p)
{
  long double l2 = 0, ell = 0, fourth = 0, w2 = 0;
  for (std::size_t i = 0; i < p.shells.size(); ++i) {
    const long double n = static_cast<long double>(p.shells[i].multiplicity);
    const long double t = p.theta_sq[i];
    l2 += n * t;
    ell += n * t * smoothness_from_norm2(p.shells[i].norm2, p.sigma);
    fourth += n * t * t;
    w2 += n * p.weights[i] * p.weights[i];
  }
  const double eps4 = std::pow(p.epsilon, 4);
  const double a2 = p.a_value * p.a_value;
  ProfileResiduals res;
  res.l2_relative = std::abs(static_cast<double>(l2) - p.r * p.r) / (p.r * p.r);
  res.ellipsoid_excess = std::max(0.0, static_cast<double>(ell) - 1.0);
  res.a_relative = std::abs(a2 - static_cast<double>(fourth) / (2.0 * eps4)) / a2;
  res.weight_norm = std::abs(static_cast<double>(w2) - 0.5);
  return res;
}

double max_radius(int k, double sigma)
{
  return std::pow(kTwoPi, -sigma) * std::pow(static_cast<double>(k), -sigma / 2.0);
}

double asymptotic_support_radius(int k, double sigma, double r)
{
  return std::pow(1.0 + 4.0 * sigma / k, 1.0 / (2.0 * sigma)) / (kTwoPi * std::pow(r, 1.0 / sigma));
}

double asymptotic_constant(double sigma, int k)
{
  const double kk = k;
  const double c2 = std::pow(std::numbers::pi, kk) * (1.0 + 2.0 * sigma / kk) * std::tgamma(1.0 + kk / 2.0) /
                    (std::pow(1.0 + 4.0 * sigma / kk, 1.0 + kk / (2.0 * sigma)) * std::pow(std::tgamma(1.5), kk));
  return std::sqrt(c2);
}

double a_asymptotic(int k, double sigma, double eps, double r, AsymptoticRegime regime)
{
  require(k >= 1 && sigma > 0.0 && eps > 0.0 && r > 0.0, ErrorCode::invalid_argument,
          "a_asymptotic needs positive k, sigma, eps, r");
  const double kk = k;
  const double power = std::pow(r, 2.0 + kk / (2.0 * sigma)) / (eps * eps);
  if (regime == AsymptoticRegime::fixed_k)
    return asymptotic_constant(sigma, k) * power;
  return std::pow(kTwoPi * kk / std::numbers::e, kk / 4.0) / std::numbers::e *
         std::pow(std::numbers::pi * kk, 0.25) * power;
}

ExtremalSolver::ExtremalSolver(int k, double sigma, std::optional<int> window)
  : k_(k)
  , sigma_(sigma)
  , window_(window)
{
  require(k >= 1, ErrorCode::invalid_argument, "k must be positive");
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  require(!window || *window >= 1, ErrorCode::invalid_argument, "window must be >= 1");
}

void ExtremalSolver::grow_to(double radius)
{
  if (saturated_ || radius <= radius_)
    return;
  if (window_) {
    const double full = std::sqrt(static_cast<double>(k_)) * *window_ + 1.0;
    if (radius >= full) {
      radius = full;
      saturated_ = true;
    }
  }
  if (radius * radius > (k_ == 1 ? kMaxNorm2Line : kMaxNorm2))
    fail(ErrorCode::no_convergence,
         "extremal support radius " + std::to_string(radius) + " exceeds the supported lattice size (k=" +
           std::to_string(k_) + ")");
  radius_ = radius;
  shells_ = shell_spectrum(k_, radius_, window_);
  const std::size_t n = shells_.size();
  c2_.resize(n);
  n_prefix_.assign(n + 1, 0.0);
  c_prefix_.assign(n + 1, 0.0);
  d_prefix_.assign(n + 1, 0.0);
  long double sn = 0, sc = 0, sd = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c2 = smoothness_from_norm2(shells_[i].norm2, sigma_);
    const long double m = static_cast<long double>(shells_[i].multiplicity);
    c2_[i] = c2;
    sn += m;
    sc += m * c2;
    sd += m * c2 * static_cast<long double>(c2);
    n_prefix_[i + 1] = static_cast<double>(sn);
    c_prefix_[i + 1] = static_cast<double>(sc);
    d_prefix_[i + 1] = static_cast<double>(sd);
  }
}

ExtremalSolver::Bracket ExtremalSolver::bracket(double r)
{
  const double rmax = max_radius(k_, sigma_);
  require(r > 0.0 && r < rmax, ErrorCode::infeasible_radius,
          "radius outside (0, " + std::to_string(rmax) + "): " + describe(k_, sigma_, r));
  const double inv_r2 = 1.0 / (r * r);
  grow_to(std::max(2.0 * asymptotic_support_radius(k_, sigma_, r), std::sqrt(static_cast<double>(k_)) + 1.0));

  for (;;) {
    const std::size_t n = shells_.size();
    // With support = first K shells and cut-off t = c2[K], the weighted mean
    // of c^2 is increasing in K; find the first K where it reaches 1/r^2.
    auto reaches = [&](std::size_t K) {
      const double t = c2_[K];
      const double s1 = n_prefix_[K] - c_prefix_[K] / t;
      const double s2 = c_prefix_[K] - d_prefix_[K] / t;
      return s2 >= s1 * inv_r2;
    };
    std::size_t lo = 1, hi = n;  // answer in [lo, hi); hi == n means not found
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (reaches(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    std::size_t K = lo;
    if (K < n || saturated_) {
      K = std::min(K, n);
      const double num = n_prefix_[K] - c_prefix_[K] * (r * r);
      const double den = c_prefix_[K] - d_prefix_[K] * (r * r);
      double mu = num / den;
      if (K == n && !(mu > 0.0))
        mu = 0.0;  // window exhausted before the ellipsoid constraint binds
      if (saturated_)
        return {K, mu};
      const double boundary = std::sqrt(std::pow(1.0 / mu, 1.0 / sigma_) /
                                        (4.0 * std::numbers::pi * std::numbers::pi));
      if (boundary < 0.98 * radius_)
        return {K, mu};
    }
    grow_to(2.0 * radius_);
  }
}

double ExtremalSolver::a_unit(double r)
{
  const Bracket b = bracket(r);
  long double s1 = 0, s4 = 0;
  for (std::size_t i = 0; i < b.support; ++i) {
    const long double m = static_cast<long double>(shells_[i].multiplicity);
    const long double v = 1.0L - static_cast<long double>(b.mu) * c2_[i];
    s1 += m * v;
    s4 += m * v * v;
  }
  const long double A = static_cast<long double>(r) * r / s1;
  return static_cast<double>(std::sqrt(A * A * s4 / 2.0L));
}

ExtremalProfile ExtremalSolver::solve(double eps, double r)
{
  require(eps > 0.0, ErrorCode::invalid_argument, "noise level must be positive");
  const Bracket b = bracket(r);
  ExtremalProfile p;
  p.k = k_;
  p.sigma = sigma_;
  p.epsilon = eps;
  p.r = r;
  p.window = window_;
  p.mu = b.mu;
  p.shells.assign(shells_.begin(), shells_.begin() + static_cast<std::ptrdiff_t>(b.support));

  long double s1 = 0;
  for (std::size_t i = 0; i < b.support; ++i)
    s1 += static_cast<long double>(shells_[i].multiplicity) * (1.0L - static_cast<long double>(b.mu) * c2_[i]);
  const long double A = static_cast<long double>(r) * r / s1;
  p.amplitude = static_cast<double>(A);

  p.theta_sq.resize(b.support);
  long double s4 = 0;
  for (std::size_t i = 0; i < b.support; ++i) {
    const long double t = A * (1.0L - static_cast<long double>(b.mu) * c2_[i]);
    p.theta_sq[i] = static_cast<double>(t);
    s4 += static_cast<long double>(shells_[i].multiplicity) * t * t;
  }
  const double eps2 = eps * eps;
  p.a_value = static_cast<double>(std::sqrt(s4 / 2.0L)) / eps2;
  p.weights.resize(b.support);
  for (std::size_t i = 0; i < b.support; ++i)
    p.weights[i] = p.theta_sq[i] / (2.0 * eps2 * p.a_value);
  return p;
}

double ExtremalSolver::a_value(double eps, double r)
{
  require(eps > 0.0, ErrorCode::invalid_argument, "noise level must be positive");
  return a_unit(r) / (eps * eps);
}

double ExtremalSolver::r_star(double eps, double target)
{
  require(eps > 0.0, ErrorCode::invalid_argument, "noise level must be positive");
  require(target > 0.0, ErrorCode::invalid_argument, "target level must be positive");
  const double goal = target * eps * eps;  // a scales as 1/eps^2
  const double tol = 1e-6 * goal;

  const double r_hi_limit = max_radius(k_, sigma_) * (1.0 - 1e-9);
  double hi = r_hi_limit;
  const double a_hi = a_unit(hi);
  if (a_hi < goal) {
    std::ostringstream os;
    os.precision(10);
    os << "a(r) tops out at " << a_hi / (eps * eps) << " < target " << target
       << " (k=" << k_ << " sigma=" << sigma_ << " eps=" << eps << ")";
    fail(ErrorCode::target_unattainable, os.str());
  }
  if (std::abs(a_hi - goal) <= tol)
    return hi;

  const double power = 2.0 + k_ / (2.0 * sigma_);
  double lo = std::min(0.5 * hi, 0.5 * std::pow(goal / asymptotic_constant(sigma_, k_), 1.0 / power));
  for (int i = 0; a_unit(lo) >= goal; ++i) {
    if (i > 200)
      fail(ErrorCode::no_convergence, "could not bracket r* from below");
    hi = lo;
    lo *= 0.5;
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double a = a_unit(mid);
    if (std::abs(a - goal) <= tol)
      return mid;
    if (a < goal)
      lo = mid;
    else
      hi = mid;
  }
  fail(ErrorCode::no_convergence, "r* bisection did not reach 1e-6 relative accuracy");
}

ExtremalProfile solve_extremal(int k, double sigma, double eps, double r, std::optional<int> window)
{
  return ExtremalSolver(k, sigma, window).solve(eps, r);
}

double a_value(int k, double sigma, double eps, double r, std::optional<int> window)
{
  return ExtremalSolver(k, sigma, window).a_value(eps, r);
}

double solve_r_star(int k, double sigma, double eps, double target, std::optional<int> window)
{
  return ExtremalSolver(k, sigma, window).r_star(eps, target);
}

} // namespace sparse_anova
