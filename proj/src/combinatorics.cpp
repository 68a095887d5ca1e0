#include "sparse_anova/combinatorics.hpp"

#include "sparse_anova/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sparse_anova {

SubsetId::SubsetId(std::vector<int> coords)
  : coords_(std::move(coords))
{
  require(!coords_.empty(), ErrorCode::invalid_argument, "subset must be nonempty");
  require(coords_.front() >= 1, ErrorCode::invalid_argument, "subset coordinates are 1-based");
  for (std::size_t i = 1; i < coords_.size(); ++i)
    require(coords_[i - 1] < coords_[i], ErrorCode::invalid_argument,
            "subset coordinates must be strictly increasing");
}

SubsetId::SubsetId(std::initializer_list<int> coords)
  : SubsetId(std::vector<int>(coords))
{}

std::string SubsetId::to_string() const
{
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < coords_.size(); ++i)
    os << (i ? "," : "") << coords_[i];
  os << '}';
  return os.str();
}

FrequencyVector::FrequencyVector(std::vector<int> entries)
  : entries_(std::move(entries))
{
  require(!entries_.empty(), ErrorCode::invalid_argument, "frequency vector must be nonempty");
  for (int l : entries_)
    require(l != 0, ErrorCode::invalid_argument, "frequency entries must be nonzero");
}

FrequencyVector::FrequencyVector(std::initializer_list<int> entries)
  : FrequencyVector(std::vector<int>(entries))
{}

std::int64_t FrequencyVector::norm2() const noexcept
{
  std::int64_t s = 0;
  for (int l : entries_)
    s += static_cast<std::int64_t>(l) * l;
  return s;
}

std::uint64_t binomial(int d, int k)
{
  require(d >= 0 && k >= 0, ErrorCode::invalid_argument, "binomial needs nonnegative arguments");
  if (k > d)
    return 0;
  const int j = std::min(k, d - k);
  unsigned __int128 result = 1;
  for (int i = 1; i <= j; ++i) {
    result = result * static_cast<unsigned>(d - j + i) / static_cast<unsigned>(i);
    require(result <= UINT64_MAX, ErrorCode::invalid_argument,
            "binomial(" + std::to_string(d) + "," + std::to_string(k) + ") overflows 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

double log_binomial(int d, int k)
{
  require(d >= 1 && k >= 1 && k <= d, ErrorCode::invalid_argument,
          "log_binomial needs 1 <= k <= d, got d=" + std::to_string(d) + " k=" + std::to_string(k));
  const int j = std::min(k, d - k);
  if (j <= 256) {
    double s = 0.0;
    for (int i = 1; i <= j; ++i)
      s += std::log(static_cast<double>(d - j + i) / i);
    return s;
  }
  return std::lgamma(d + 1.0) - std::lgamma(k + 1.0) - std::lgamma(d - k + 1.0);
}

std::uint64_t subset_rank(const SubsetId& u, int d)
{
  const int k = u.size();
  require(u.back() <= d, ErrorCode::invalid_argument, "subset " + u.to_string() + " exceeds d");
  std::uint64_t rank = 0;
  int prev = 0;
  for (int i = 1; i <= k; ++i) {
    for (int j = prev + 1; j < u[i - 1]; ++j)
      rank += binomial(d - j, k - i);
    prev = u[i - 1];
  }
  return rank;
}

SubsetId subset_unrank(std::uint64_t rank, int d, int k)
{
  require(k >= 1 && k <= d, ErrorCode::invalid_argument, "subset_unrank needs 1 <= k <= d");
  require(rank < binomial(d, k), ErrorCode::invalid_argument, "subset rank out of range");
  std::vector<int> coords(static_cast<std::size_t>(k));
  int j = 1;
  for (int i = 1; i <= k; ++i) {
    for (;; ++j) {
      const std::uint64_t block = binomial(d - j, k - i);
      if (rank < block)
        break;
      rank -= block;
    }
    coords[static_cast<std::size_t>(i - 1)] = j++;
  }
  return SubsetId(std::move(coords));
}

SubsetStream::SubsetStream(int d, int k)
  : SubsetStream(d, k, 0, 0)
{
  count_ = binomial(d, k);
}

SubsetStream::SubsetStream(int d, int k, std::uint64_t first, std::uint64_t count)
  : d_(d)
  , k_(k)
  , first_(first)
  , count_(count)
{
  require(k >= 1 && k <= d, ErrorCode::invalid_argument,
          "enumerate_subsets needs 1 <= k <= d, got d=" + std::to_string(d) + " k=" + std::to_string(k));
  const std::uint64_t total = binomial(d, k);
  require(first <= total && count <= total - first, ErrorCode::invalid_argument,
          "subset chunk out of range");
}

SubsetStream::iterator SubsetStream::begin() const
{
  iterator it;
  it.d_ = d_;
  it.rank_ = first_;
  it.remaining_ = count_;
  if (count_ > 0) {
    it.current_ = subset_unrank(first_, d_, k_);
    it.work_.assign(it.current_.coords().begin(), it.current_.coords().end());
  }
  return it;
}

SubsetStream::iterator& SubsetStream::iterator::operator++()
{
  if (--remaining_ == 0)
    return *this;
  ++rank_;
  const int k = static_cast<int>(work_.size());
  int i = k - 1;
  while (work_[static_cast<std::size_t>(i)] == d_ - k + i + 1)
    --i;
  ++work_[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j)
    work_[static_cast<std::size_t>(j)] = work_[static_cast<std::size_t>(j - 1)] + 1;
  current_ = SubsetId(work_);
  return *this;
}

SubsetStream enumerate_subsets(int d, int k)
{
  return SubsetStream(d, k);
}

std::int64_t max_norm2_below(double radius)
{
  if (!(radius > 0.0))
    return -1;
  return static_cast<std::int64_t>(std::ceil(radius * radius)) - 1;
}

namespace {

void frequencies_rec(int depth, int k, int bound, std::int64_t budget,
                     std::vector<int>& work, Lattice& out)
{
  if (depth == k) {
    out.emplace_back(work);
    return;
  }
  // Each remaining coordinate needs at least 1 in squared norm.
  const std::int64_t left = budget - (k - depth - 1);
  for (int l = -bound; l <= bound; ++l) {
    if (l == 0 || static_cast<std::int64_t>(l) * l > left)
      continue;
    work[static_cast<std::size_t>(depth)] = l;
    frequencies_rec(depth + 1, k, bound, budget - static_cast<std::int64_t>(l) * l, work, out);
  }
}

} // namespace

Lattice enumerate_frequencies(int k, double radius, std::optional<int> window)
{
  require(k >= 1, ErrorCode::invalid_argument, "frequency dimension must be positive");
  require(radius > 0.0, ErrorCode::invalid_argument, "radius must be positive");
  Lattice out;
  const std::int64_t smax = max_norm2_below(radius);
  if (smax < k)
    return out;
  int bound = static_cast<int>(std::floor(std::sqrt(static_cast<double>(smax)))) + 1;
  if (window)
    bound = std::min(bound, *window);
  std::vector<int> work(static_cast<std::size_t>(k));
  frequencies_rec(0, k, bound, smax, work, out);
  return out;
}

double smoothness_from_norm2(std::int64_t norm2, double sigma)
{
  return std::pow(4.0 * std::numbers::pi * std::numbers::pi * static_cast<double>(norm2), sigma);
}

double smoothness_coefficient(const FrequencyVector& l, double sigma)
{
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  return smoothness_from_norm2(l.norm2(), sigma);
}

std::vector<Shell> shell_spectrum(int k, double radius, std::optional<int> window)
{
  require(k >= 1, ErrorCode::invalid_argument, "frequency dimension must be positive");
  require(radius > 0.0, ErrorCode::invalid_argument, "radius must be positive");
  require(!window || *window >= 1, ErrorCode::invalid_argument, "window must be >= 1");
  const std::int64_t smax = max_norm2_below(radius);
  if (smax < k)
    return {};
  if (k == 1) {
    std::vector<Shell> shells;
    for (std::int64_t p = 1; p * p <= smax && (!window || p <= *window); ++p)
      shells.push_back({p * p, 2});
    return shells;
  }

  // Count tuples of positive integers by squared norm, one coordinate at a
  // time, keeping the partial counts sparse.
  std::vector<std::int64_t> dense(static_cast<std::size_t>(smax + 1), 0);
  std::vector<std::pair<std::int64_t, std::int64_t>> sparse{{0, 1}};
  for (int j = 0; j < k; ++j) {
    std::fill(dense.begin(), dense.end(), 0);
    const std::int64_t reserve = k - j - 1;
    for (auto [s, c] : sparse) {
      for (std::int64_t p = 1;; ++p) {
        if (window && p > *window)
          break;
        const std::int64_t t = s + p * p;
        if (t + reserve > smax)
          break;
        dense[static_cast<std::size_t>(t)] += c;
      }
    }
    sparse.clear();
    for (std::int64_t s = 0; s <= smax; ++s)
      if (dense[static_cast<std::size_t>(s)] != 0)
        sparse.emplace_back(s, dense[static_cast<std::size_t>(s)]);
  }

  const std::int64_t signs = std::int64_t{1} << k;
  std::vector<Shell> shells;
  shells.reserve(sparse.size());
  for (auto [s, c] : sparse)
    shells.push_back({s, c * signs});
  return shells;
}

} // namespace sparse_anova
