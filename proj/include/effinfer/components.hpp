#pragma once

// Handlers and walkers shared by the inference patterns.

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "effinfer/comp.hpp"
#include "effinfer/cons_list.hpp"
#include "effinfer/debug.hpp"
#include "effinfer/model.hpp"
#include "effinfer/random.hpp"

namespace effinfer {

/// Uniform draws per sample site. Values lie in [0, 1).
using Trace = std::map<Addr, double>;

/// Log-probability per sample/observe site.
using LPTrace = std::map<Addr, LogP>;

/// Particle weight for the resample-move filter.
struct PState {
  LogP weight = 0.0;
  Trace trace;
};

namespace detail {

// reuse_trace state: the caller's trace (shared, never copied per request)
// plus the draws made for sites it did not cover. Addresses are unique per
// execution, so a fresh site is never looked up again.
struct ReuseState {
  std::shared_ptr<const Trace> base;
  ConsList<std::pair<Addr, double>> fresh;

  Trace materialise() const {
    Trace out = *base;
    for (auto& [addr, r] : fresh.oldest_first()) out.emplace(addr, r);
    return out;
  }
};

}  // namespace detail

/// Discharges Sample using the stored uniform for each address in `trace`,
/// drawing and recording a fresh one otherwise. The leaf carries the final
/// trace: `trace` plus the fresh entries.
template <class... Es, class A>
Comp<Sig<Es...>, std::pair<A, Trace>> reuse_trace(const Trace& trace,
                                                  const Comp<Sig<Sample, Es...>, A>& c) {
  using Out = Comp<Sig<Es...>, std::pair<A, Trace>>;
  using State = detail::ReuseState;
  return handle_stateful(
      c, State{std::make_shared<const Trace>(trace), {}},
      [](const State& s, const A& x) { return Out::pure({x, s.materialise()}); },
      [](const State& s, const SampleOp& op, const StatefulResumption<State, Out>& k) {
        return chain(random_uniform<Sig<Es...>>(), [s, op, k](double r) {
          auto it = s.base->find(op.addr);
          if (it != s.base->end()) return k(s, op.dist.draw(it->second));
          State next{s.base, s.fresh.push({op.addr, r})};
          return k(std::move(next), op.dist.draw(r));
        });
      });
}

/// Discharges Observe, summing the log-probabilities of the observed values.
template <class... Es, class A>
Comp<Sig<Es...>, std::pair<A, LogP>> likelihood(const Comp<Sig<Observe, Es...>, A>& c) {
  using Out = Comp<Sig<Es...>, std::pair<A, LogP>>;
  return handle_stateful(
      c, LogP{0.0}, [](LogP w, const A& x) { return Out::pure({x, w}); },
      [](LogP w, const ObserveOp& op, const StatefulResumption<LogP, Out>& k) {
        return k(w + op.dist.log_prob(op.observed), op.observed);
      });
}

namespace detail {

template <class... Es, class A>
Comp<Sig<Es...>, std::pair<A, LPTrace>> trace_lp_loop(const Comp<Sig<Es...>, A>& c,
                                                      ConsList<std::pair<Addr, LogP>> acc) {
  using Out = Comp<Sig<Es...>, std::pair<A, LPTrace>>;
  const auto cur = c.force();
  if (cur.is_value()) {
    LPTrace lps;
    for (auto& [addr, lp] : acc.oldest_first()) {
      bool inserted = lps.emplace(addr, lp).second;
      if (!inserted && debug_checks_enabled()) {
        throw InvariantViolation("duplicate address " + to_string(addr));
      }
    }
    return Out::pure({cur.value(), std::move(lps)});
  }
  const auto& op = cur.op();
  std::optional<std::pair<AnyDist, Addr>> site;
  if (const auto* s = op.template project<Sample>()) site.emplace(s->dist, s->addr);
  if (const auto* o = op.template project<Observe>()) site.emplace(o->dist, o->addr);
  if (!site) {
    return Out::request(op, [k = cur.resume(), acc](Any x) {
      return trace_lp_loop(k(std::move(x)), acc);
    });
  }
  return Out::request(op, [k = cur.resume(), acc, site = std::move(*site)](Any x) {
    const LogP lp = site.first.log_prob(x);
    return trace_lp_loop(k(std::move(x)), acc.push({site.second, lp}));
  });
}

}  // namespace detail

/// Pass-through instrumentation: re-emits every request unchanged and records
/// log_prob(dist, result) at each Sample and Observe address.
template <class... Es, class A>
Comp<Sig<Es...>, std::pair<A, LPTrace>> trace_log_probs(const Comp<Sig<Es...>, A>& c) {
  return detail::trace_lp_loop(c, {});
}

/// Shallow walker: runs up to the first Observe, returns the uninvoked
/// resumption (still carrying Observe) and w plus that observation's log
/// probability. A value leaf comes back unchanged with w.
template <class... Es, class A>
Comp<Sig<Es...>, std::pair<Comp<Sig<Observe, Es...>, A>, LogP>> advance(
    LogP w, const Comp<Sig<Observe, Es...>, A>& c) {
  using Particle = Comp<Sig<Observe, Es...>, A>;
  using Out = Comp<Sig<Es...>, std::pair<Particle, LogP>>;
  const Particle cur = c.force();
  if (cur.is_value()) return Out::pure({cur, w});
  auto parts = decompose(cur.op());
  if (parts.index() == 0) {
    const ObserveOp& obs = std::get<0>(parts);
    return Out::pure({Particle::suspended(cur.resume(), obs.observed, obs.addr.tag, cur.op()),
                      w + obs.dist.log_prob(obs.observed)});
  }
  return Out::request(std::get<1>(std::move(parts)), [k = cur.resume(), w](Any x) {
    return advance(w, k(std::move(x)));
  });
}

/// Re-emits the first t Observe requests, then stops at the next one and
/// returns its uninvoked resumption applied to the observed value. That
/// Observe itself is not re-emitted; the remainder keeps it, so reissue()
/// hands it to the handlers of a later run. Non-Observe requests pass
/// through.
template <class... Es, class A>
Comp<Sig<Es...>, Comp<Sig<Es...>, A>> suspend_after(int t, const Comp<Sig<Es...>, A>& c) {
  using Inner = Comp<Sig<Es...>, A>;
  using Out = Comp<Sig<Es...>, Inner>;
  const Inner cur = c.force();
  if (cur.is_value()) return Out::pure(cur);
  if (const ObserveOp* obs = cur.op().template project<Observe>(); obs && t <= 0) {
    return Out::pure(Inner::suspended(cur.resume(), obs->observed, obs->addr.tag, cur.op()));
  }
  const bool counts = cur.op().template project<Observe>() != nullptr;
  return Out::request(cur.op(), [k = cur.resume(), t = counts ? t - 1 : t](Any x) {
    return suspend_after(t, k(std::move(x)));
  });
}

/// Like suspend_after, but the Observe at which it stops is re-emitted too:
/// the first t + 1 observations stay visible to the handlers, and the
/// remainder resumes right after the last of them.
template <class... Es, class A>
Comp<Sig<Es...>, Comp<Sig<Es...>, A>> suspend_through(int t, const Comp<Sig<Es...>, A>& c) {
  using Inner = Comp<Sig<Es...>, A>;
  using Out = Comp<Sig<Es...>, Inner>;
  const Inner cur = c.force();
  if (cur.is_value()) return Out::pure(cur);
  const ObserveOp* obs = cur.op().template project<Observe>();
  if (obs && t <= 0) {
    return Out::request(cur.op(), [k = cur.resume(), tag = obs->addr.tag](Any x) {
      return Out::pure(Inner::suspended(k, std::move(x), tag));
    });
  }
  return Out::request(cur.op(), [k = cur.resume(), t = obs ? t - 1 : t](Any x) {
    return suspend_through(t, k(std::move(x)));
  });
}

/// The results of every particle if all of them are value leaves.
template <class S, class A, class W>
std::optional<std::vector<std::pair<A, W>>> done(const std::vector<std::pair<Comp<S, A>, W>>& pws) {
  std::vector<std::pair<A, W>> out;
  out.reserve(pws.size());
  for (const auto& [p, w] : pws) {
    if (!p.is_value()) return std::nullopt;
    out.emplace_back(p.value(), w);
  }
  return out;
}

}  // namespace effinfer
