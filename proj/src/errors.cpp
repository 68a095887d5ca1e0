#include "sparse_anova/errors.hpp"

namespace sparse_anova {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::infeasible_radius: return "infeasible-radius";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::target_unattainable: return "target-unattainable";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::unknown_subset: return "unknown-subset";
    case ErrorCode::missing_frequency: return "missing-frequency";
    case ErrorCode::index_mismatch: return "index-mismatch";
    case ErrorCode::domain_error: return "domain-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
  : std::runtime_error(std::string(to_string(code)) + ": " + what)
  , code_(code)
  , detail_(what)
{}

bool Error::numerical() const noexcept
{
  return code_ == ErrorCode::infeasible_radius ||
         code_ == ErrorCode::no_convergence ||
         code_ == ErrorCode::target_unattainable;
}

void fail(ErrorCode code, const std::string& what)
{
  throw Error(code, what);
}

} // namespace sparse_anova
