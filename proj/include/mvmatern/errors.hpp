#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvmatern {

/// Expanded parameters are not finite (link overflow) or otherwise unusable.
class InvalidParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance matrix failed its Cholesky factorization. For Vecchia
/// evaluations `block()` is the offending position k in the ordering.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, std::size_t block)
      : std::runtime_error(what), block_(block) {}
  std::size_t block() const { return block_; }

 private:
  std::size_t block_;
};

/// Malformed or unusable input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mvmatern
