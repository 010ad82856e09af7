#include "sie/common/clock.hpp"

#include <atomic>
#include <chrono>
#include <memory>

namespace sie {

std::int64_t system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Clock system_clock() { return &system_now_ms; }

Clock stepping_clock(std::int64_t start, std::int64_t step) {
  auto next = std::make_shared<std::atomic<std::int64_t>>(start);
  return [next, step] { return next->fetch_add(step); };
}

}  // namespace sie
