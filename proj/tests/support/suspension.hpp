#pragma once

// Runs a model under a fixed trace three ways: whole, as the suspend_after(t)
// prefix, and as the reissued remainder of that prefix.

#include <cstdint>

#include "effinfer/components.hpp"
#include "effinfer/model.hpp"

namespace suspension {

using namespace effinfer;

template <class A>
struct Outcome {
  bool value_equal = false;
  bool lp_equal = false;
  bool disjoint = false;
  std::size_t prefix_sites = 0;
  std::size_t suffix_sites = 0;
};

/// A complete trace for the model: every sample site drawn once from seed.
template <class A>
Trace full_trace(const Model<A>& model, std::uint64_t seed) {
  RandomSource src(seed);
  return run_random(reuse_trace(Trace{}, default_observe(assign_addresses(model))), src).second;
}

template <class A>
Outcome<A> compose(const Model<A>& model, int t, const Trace& trace) {
  const Model<A> assigned = assign_addresses(model);
  // Under a complete trace no uniform is ever used, so the source seeds do
  // not matter; distinct ones make that visible.
  RandomSource s1(101);
  RandomSource s2(202);
  RandomSource s3(303);
  auto whole = run_random(reuse_trace(trace, default_observe(trace_log_probs(assigned))), s1);
  auto prefix =
      run_random(reuse_trace(trace, default_observe(trace_log_probs(suspend_after(t, assigned)))), s2);
  const Model<A> remainder = prefix.first.first;
  auto suffix =
      run_random(reuse_trace(trace, default_observe(trace_log_probs(remainder.reissue()))), s3);

  Outcome<A> out;
  out.value_equal = suffix.first.first == whole.first.first;
  LPTrace merged = prefix.first.second;
  out.prefix_sites = merged.size();
  out.suffix_sites = suffix.first.second.size();
  out.disjoint = true;
  for (const auto& [addr, lp] : suffix.first.second) {
    if (!merged.emplace(addr, lp).second) out.disjoint = false;
  }
  out.lp_equal = merged == whole.first.second;
  return out;
}

}  // namespace suspension
