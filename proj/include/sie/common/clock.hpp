#pragma once

#include <cstdint>
#include <functional>

namespace sie {

/// Milliseconds since the Unix epoch. Injected wherever timestamps are
/// recorded so tests can pin them.
using Clock = std::function<std::int64_t()>;

std::int64_t system_now_ms();

Clock system_clock();

/// Returns start, start+step, start+2*step, ...
Clock stepping_clock(std::int64_t start, std::int64_t step = 1);

}  // namespace sie
