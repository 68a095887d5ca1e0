#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparse_anova {

enum class ErrorCode {
  invalid_argument,
  infeasible_radius,
  no_convergence,
  target_unattainable,
  dimension_mismatch,
  unknown_subset,
  missing_frequency,
  index_mismatch,
  domain_error,
};

std::string_view to_string(ErrorCode code);

//! Library-wide exception. The code lets callers (the CLI in particular)
//! separate bad input from numerical infeasibility.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  //! Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

  //! True for failures of the numerics on otherwise well-formed input.
  bool numerical() const noexcept;

private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what)
{
  if (!condition)
    fail(code, what);
}

} // namespace sparse_anova
