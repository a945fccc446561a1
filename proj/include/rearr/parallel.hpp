#pragma once

#include <cstddef>
#include <functional>

namespace rearr {

/// Number of worker threads available to internal loops; read once from the
/// REARR_WORKERS environment variable, defaulting to the hardware concurrency.
std::size_t worker_budget();

/// Runs body(i) for i in [0, count). Each index is processed exactly once and
/// results must be written to per-index slots; callers reduce in index order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rearr
