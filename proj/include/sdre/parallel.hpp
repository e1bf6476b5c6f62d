#pragma once

#include <functional>

namespace sdre {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker, so results do not depend on the count.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace sdre
