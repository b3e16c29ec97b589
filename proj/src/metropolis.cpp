#include "effinfer/metropolis.hpp"

#include <cmath>

namespace effinfer {

bool accept_log_ratio(LogP ratio, double u) {
  if (ratio >= 0.0) return true;
  return std::exp(ratio) >= u;
}

bool im_accepts(LogP current, LogP proposed, double u) {
  return accept_log_ratio(proposed - current, u);
}

LogP ssmh_log_ratio(const LPTrace& current, const LPTrace& proposed, const Addr& site,
                    std::size_t current_trace_size, std::size_t proposed_trace_size) {
  LogP sum = 0.0;
  auto it = current.begin();
  for (const auto& [addr, lp_new] : proposed) {
    while (it != current.end() && it->first < addr) ++it;
    if (it == current.end()) break;
    if (it->first == addr && addr != site) sum += lp_new - it->second;
  }
  return sum + std::log(static_cast<double>(current_trace_size)) -
         std::log(static_cast<double>(proposed_trace_size));
}

Trace restrict_to(const Trace& trace, const LPTrace& lps) {
  Trace out;
  for (const auto& [addr, r] : trace) {
    if (lps.contains(addr)) out.emplace_hint(out.end(), addr, r);
  }
  return out;
}

}  // namespace effinfer
