#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace idla {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: unknown generator ids, letters from another model,
/// empty or inconsistent sets.
class invalid_input : public error {
  public:
    using error::error;
};

/// The requested operation needs exact tree formulas the model does not have.
class unsupported_operation : public error {
  public:
    using error::error;
};

/// A memory or size budget would be exceeded. `required` is the element count
/// the operation would have needed.
class resource_error : public error {
  public:
    resource_error(const std::string& what, std::uint64_t required)
        : error(what), required_(required) {}
    std::uint64_t required() const noexcept { return required_; }

  private:
    std::uint64_t required_;
};

/// Closed-form integer value does not fit in 64 bits.
class overflow_error : public error {
  public:
    using error::error;
};

/// A walk ran past its hard step cap. Exit is almost sure on every supported
/// group, so this signals a bug rather than bad luck.
class step_cap_error : public error {
  public:
    using error::error;
};

/// Least-squares fit could not be computed (too few points, zero variance).
class fit_error : public error {
  public:
    using error::error;
};

}  // namespace idla
