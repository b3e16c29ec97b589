#include "effinfer/particle_filter.hpp"

#include <fmt/core.h>

#include <cstdio>

namespace effinfer {

std::vector<std::string> unknown_tags(const std::set<std::string>& tags, const Trace& trace) {
  std::set<std::string> present;
  for (const auto& entry : trace) present.insert(entry.first.tag);
  std::vector<std::string> out;
  for (const auto& tag : tags) {
    if (!present.contains(tag)) out.push_back(tag);
  }
  return out;
}

Trace filter_tags(const Trace& trace, const std::set<std::string>& tags) {
  Trace out;
  for (const auto& [addr, r] : trace) {
    if (tags.contains(addr.tag)) out.emplace_hint(out.end(), addr, r);
  }
  return out;
}

void warn_stderr(const std::string& message) { fmt::print(stderr, "warning: {}\n", message); }

}  // namespace effinfer
