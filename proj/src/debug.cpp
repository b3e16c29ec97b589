#include "effinfer/debug.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace effinfer {
namespace {

std::atomic<bool>& debug_flag() {
  static std::atomic<bool> flag = [] {
    const char* env = std::getenv("INFER_DEBUG");
    return env != nullptr && std::string_view(env) == "1";
  }();
  return flag;
}

}  // namespace

bool debug_checks_enabled() { return debug_flag().load(std::memory_order_relaxed); }

void set_debug_checks(bool enabled) { debug_flag().store(enabled, std::memory_order_relaxed); }

}  // namespace effinfer
