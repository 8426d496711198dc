#pragma once

#include <functional>

namespace bidlab {

/// Runs fn(0..count-1) across up to `workers` threads. Tasks must be
/// independent; results are deterministic because each index owns its output
/// slot and draws from its own rng sub-stream.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace bidlab
