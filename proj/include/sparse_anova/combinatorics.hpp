#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparse_anova {

//! An ordered k-subset {j_1 < ... < j_k} of {1, ..., d}, i.e. the index of
//! one k-variate ANOVA component. Coordinates are 1-based.
class SubsetId {
public:
  SubsetId() = default;
  explicit SubsetId(std::vector<int> coords);
  SubsetId(std::initializer_list<int> coords);

  std::span<const int> coords() const noexcept { return coords_; }
  int size() const noexcept { return static_cast<int>(coords_.size()); }
  int operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  int back() const { return coords_.back(); }

  std::string to_string() const;

  friend bool operator==(const SubsetId&, const SubsetId&) = default;
  friend auto operator<=>(const SubsetId&, const SubsetId&) = default;

private:
  std::vector<int> coords_;
};

//! Nonzero integer frequencies l_j for the coordinates j of one subset.
//! Coordinates outside the subset are implicitly zero.
class FrequencyVector {
public:
  FrequencyVector() = default;
  explicit FrequencyVector(std::vector<int> entries);
  FrequencyVector(std::initializer_list<int> entries);

  std::span<const int> entries() const noexcept { return entries_; }
  int size() const noexcept { return static_cast<int>(entries_.size()); }
  int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }

  //! Squared Euclidean norm, sum of l_j^2.
  std::int64_t norm2() const noexcept;

  friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;
  friend auto operator<=>(const FrequencyVector&, const FrequencyVector&) = default;

private:
  std::vector<int> entries_;
};

using Lattice = std::vector<FrequencyVector>;

//! Exact binomial coefficient; throws invalid-argument on overflow of 64 bits.
std::uint64_t binomial(int d, int k);

//! log(d choose k), accurate to ~1e-14 relative for the small k used here.
double log_binomial(int d, int k);

//! Position of `u` in the lexicographic order of all k-subsets of {1..d}.
std::uint64_t subset_rank(const SubsetId& u, int d);
SubsetId subset_unrank(std::uint64_t rank, int d, int k);

//! Lexicographic stream over (a contiguous chunk of) the k-subsets of {1..d}.
//! Holds only the current subset, so binom(d, k) may be far beyond memory.
class SubsetStream {
public:
  SubsetStream(int d, int k);
  SubsetStream(int d, int k, std::uint64_t first, std::uint64_t count);

  class iterator {
  public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SubsetId;
    using difference_type = std::ptrdiff_t;
    using pointer = const SubsetId*;
    using reference = const SubsetId&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    std::uint64_t rank() const noexcept { return rank_; }
    bool operator==(std::default_sentinel_t) const noexcept { return remaining_ == 0; }

  private:
    friend class SubsetStream;
    SubsetId current_;
    std::vector<int> work_;
    int d_ = 0;
    std::uint64_t rank_ = 0;
    std::uint64_t remaining_ = 0;
  };

  iterator begin() const;
  std::default_sentinel_t end() const noexcept { return {}; }
  std::uint64_t size() const noexcept { return count_; }
  int d() const noexcept { return d_; }
  int k() const noexcept { return k_; }

private:
  int d_;
  int k_;
  std::uint64_t first_;
  std::uint64_t count_;
};

SubsetStream enumerate_subsets(int d, int k);

//! All k-vectors of nonzero integers with Euclidean norm strictly below
//! `radius` (and |l_j| <= window when given), in lexicographic order.
Lattice enumerate_frequencies(int k, double radius, std::optional<int> window = std::nullopt);

//! c_l^2 = (sum_j (2 pi l_j)^2)^sigma.
double smoothness_coefficient(const FrequencyVector& l, double sigma);
double smoothness_from_norm2(std::int64_t norm2, double sigma);

//! Frequencies sharing the same squared norm. Everything in the extremal
//! problem depends on a frequency only through its shell.
struct Shell {
  std::int64_t norm2 = 0;
  std::int64_t multiplicity = 0;
};

//! Nonempty shells of {l in (Z\{0})^k : |l| < radius, |l_j| <= window},
//! sorted by norm2.
std::vector<Shell> shell_spectrum(int k, double radius, std::optional<int> window = std::nullopt);

//! Largest integer s with s < radius^2.
std::int64_t max_norm2_below(double radius);

} // namespace sparse_anova
