#pragma once

#include "sparse_anova/errors.hpp"

#include <optional>

namespace test {

//! Code of the sparse_anova::Error thrown by f, or nullopt.
template <class F>
std::optional<sparse_anova::ErrorCode> error_code(F&& f)
{
  try {
    f();
  } catch (const sparse_anova::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

} // namespace test
