#pragma once

#include <cstdint>

// Deterministic compute-cost accounting. Numerical kernels charge abstract
// work units to a per-thread counter; the virtual clock converts units to
// seconds so that timing-dependent experiments replay bit-identically.
namespace goose::work {

void charge(std::uint64_t units) noexcept;
std::uint64_t consumed() noexcept;

class Meter {
 public:
  Meter() noexcept : start_(consumed()) {}
  std::uint64_t units() const noexcept { return consumed() - start_; }

 private:
  std::uint64_t start_;
};

}  // namespace goose::work
