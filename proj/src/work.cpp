#include "goose/work.hpp"

namespace goose::work {
namespace {
thread_local std::uint64_t counter = 0;
}

void charge(std::uint64_t units) noexcept { counter += units; }

std::uint64_t consumed() noexcept { return counter; }

}  // namespace goose::work
