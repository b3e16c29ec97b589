#pragma once

// Probabilistic models: computations issuing Sample and Observe requests,
// plus the simulation interpretation.

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "effinfer/comp.hpp"
#include "effinfer/distributions.hpp"
#include "effinfer/random.hpp"

namespace effinfer {

/// Sample/Observe site: user tag plus the per-execution occurrence index.
struct Addr {
  std::string tag;
  int occurrence = 0;

  auto operator<=>(const Addr&) const = default;
  bool operator==(const Addr&) const = default;
};

/// "tag#occurrence"
std::string to_string(const Addr& addr);

struct SampleOp {
  AnyDist dist;
  Addr addr;
};

struct ObserveOp {
  AnyDist dist;
  Any observed;
  Addr addr;
};

struct Sample {
  using Op = SampleOp;
};

struct Observe {
  using Op = ObserveOp;
};

using ModelSig = Sig<Observe, Sample, Random>;

template <class A>
using Model = Comp<ModelSig, A>;

/// One Sample request. The occurrence index is filled in by
/// assign_addresses when the model is interpreted.
template <Distribution D>
Model<typename D::value_type> sample(D dist, std::string tag) {
  using T = typename D::value_type;
  using Out = Model<T>;
  return Out::request(
      Out::Request::template inject<Sample>(SampleOp{AnyDist(std::move(dist)), Addr{std::move(tag), 0}}),
      [](Any x) { return Out::pure(std::any_cast<T>(std::move(x))); });
}

/// One Observe request conditioning `dist` on `observed`. Every interpreter
/// resumes it with `observed`.
template <Distribution D>
Model<typename D::value_type> observe(D dist, typename D::value_type observed, std::string tag) {
  using T = typename D::value_type;
  using Out = Model<T>;
  return Out::request(Out::Request::template inject<Observe>(ObserveOp{
                          AnyDist(std::move(dist)), Any(observed), Addr{std::move(tag), 0}}),
                      [](Any x) { return Out::pure(std::any_cast<T>(std::move(x))); });
}

namespace detail {

template <class... Es, class A>
Comp<Sig<Es...>, A> assign_loop(const Comp<Sig<Es...>, A>& c, std::map<std::string, int> counts) {
  using C = Comp<Sig<Es...>, A>;
  C cur = c.force();
  if (cur.is_value()) return cur;
  typename C::Request op = cur.op();
  if (const SampleOp* s = op.template project<Sample>()) {
    SampleOp renamed = *s;
    renamed.addr.occurrence = counts[renamed.addr.tag]++;
    op = C::Request::template inject<Sample>(std::move(renamed));
  } else if (const ObserveOp* o = op.template project<Observe>()) {
    ObserveOp renamed = *o;
    renamed.addr.occurrence = counts[renamed.addr.tag]++;
    op = C::Request::template inject<Observe>(std::move(renamed));
  }
  return C::request(std::move(op), [k = cur.resume(), counts = std::move(counts)](Any x) {
    return assign_loop(k(std::move(x)), counts);
  });
}

}  // namespace detail

/// Rewrites each Sample/Observe occurrence index to the number of earlier
/// requests with the same tag in this execution. Idempotent.
template <class... Es, class A>
Comp<Sig<Es...>, A> assign_addresses(const Comp<Sig<Es...>, A>& c) {
  return detail::assign_loop(c, {});
}

/// Discharges Observe by resuming with the observed value.
template <class... Es, class A>
Comp<Sig<Es...>, A> default_observe(const Comp<Sig<Observe, Es...>, A>& c) {
  using Out = Comp<Sig<Es...>, A>;
  return handle_deep(
      c, [](const A& x) { return Out::pure(x); },
      [](const ObserveOp& op, const Resumption<Out>& k) { return k(op.observed); });
}

/// Discharges Sample by drawing from the distribution at a fresh uniform.
template <class... Es, class A>
Comp<Sig<Es...>, A> default_sample(const Comp<Sig<Sample, Es...>, A>& c) {
  using Out = Comp<Sig<Es...>, A>;
  return handle_deep(
      c, [](const A& x) { return Out::pure(x); },
      [](const SampleOp& op, const Resumption<Out>& k) {
        return chain(random_uniform<Sig<Es...>>(),
                     [k, dist = op.dist](double r) { return k(dist.draw(r)); });
      });
}

/// Runs the model generatively: observations are ignored, samples are fresh.
template <class A>
A simulate(const Model<A>& model, RandomSource& src) {
  return run_random(default_sample(default_observe(assign_addresses(model))), src);
}

template <class A>
A simulate(const Model<A>& model, std::uint64_t seed) {
  RandomSource src(seed);
  return simulate(model, src);
}

}  // namespace effinfer
