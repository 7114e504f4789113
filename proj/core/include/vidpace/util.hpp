#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

namespace vidpace {

// Runs fn(i) for i in [0, n) on up to `workers` threads with a static
// partition. Work items must write to disjoint locations; under that
// contract the result is identical for every worker count.
void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn);

// FNV-1a 32-bit, used for config hashes in checkpoint files.
uint32_t fnv1a32(std::string_view s);

}  // namespace vidpace
