#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snngx {

class error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition, dimension, or invariant violation.
class validation_error : public error {
  using error::error;
};

enum class io_errc {
  bad_magic,
  bad_version,
  truncated,
  invalid_field,
  unreadable,
};

class io_error : public error {
public:
  io_error(io_errc code, const std::string& what) : error(what), code_(code) {}
  io_errc code() const noexcept { return code_; }

private:
  io_errc code_;
};

/// Genetic search finished with the best distance still above the budget.
class convergence_error : public error {
public:
  convergence_error(std::size_t achieved, std::size_t budget, const std::string& what)
      : error(what), achieved_(achieved), budget_(budget) {}
  std::size_t achieved_distance() const noexcept { return achieved_; }
  std::size_t budget() const noexcept { return budget_; }

private:
  std::size_t achieved_;
  std::size_t budget_;
};

}  // namespace snngx
