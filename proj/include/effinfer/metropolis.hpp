#pragma once

// Metropolis-Hastings pattern: the mh skeleton over the Propose effect, plus
// Independence Metropolis and Single-Site Metropolis-Hastings.

#include <functional>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "effinfer/components.hpp"
#include "effinfer/cons_list.hpp"
#include "effinfer/model.hpp"
#include "effinfer/numerics.hpp"
#include "effinfer/random.hpp"

namespace effinfer {

/// One configuration of the Markov chain: model result, weight, trace.
template <class W, class A>
struct ChainNode {
  A value;
  W weight;
  Trace trace;
};

/// Runs a model under a (possibly partial) trace on its own random source.
template <class W, class A>
using ModelExec = std::function<ChainNode<W, A>(const Trace&, const Model<A>&, RandomSource&)>;

template <class W, class A>
struct Propose {
  struct ProposeOp {
    using effect = Propose;
    using result_type = Trace;
    Trace trace;
  };
  /// Returns one of its two arguments; instances may prune the trace.
  struct AcceptOp {
    using effect = Propose;
    using result_type = ChainNode<W, A>;
    ChainNode<W, A> current;
    ChainNode<W, A> proposed;
  };
  using Op = std::variant<ProposeOp, AcceptOp>;
};

template <class W, class A>
using MHSig = Sig<Propose<W, A>, Random>;

/// Propose was asked to pick a site from an empty trace.
class NoSampleSites : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class W, class A>
class MHRun : public std::enable_shared_from_this<MHRun<W, A>> {
 public:
  using Node = ChainNode<W, A>;
  using S = MHSig<W, A>;
  using Result = Comp<S, std::vector<Node>>;

  MHRun(int n, ModelExec<W, A> exec, Model<A> model)
      : n_(n), exec_(std::move(exec)), model_(std::move(model)) {}

  Comp<S, Node> execute(Trace trace) const {
    auto self = this->shared_from_this();
    return perform<S, Node>([self, trace = std::move(trace)](RandomSource& src) {
      return self->exec_(trace, self->model_, src);
    });
  }

  Result step(int i, ConsList<Node> history) const {
    if (i >= n_) return Result::pure(history.newest_first());
    auto self = this->shared_from_this();
    using P = Propose<W, A>;
    return chain(call<S>(typename P::ProposeOp{history.front().trace}),
                 [self, i, history](const Trace& proposal) {
                   return chain(self->execute(proposal), [self, i, history](const Node& proposed) {
                     return chain(call<S>(typename P::AcceptOp{history.front(), proposed}),
                                  [self, i, history](const Node& next) {
                                    return self->step(i + 1, history.push(next));
                                  });
                   });
                 });
  }

 private:
  int n_;
  ModelExec<W, A> exec_;
  Model<A> model_;
};

}  // namespace detail

/// The Metropolis-Hastings skeleton: executes the model under tau0, then n
/// rounds of Propose, exec, Accept. The chain comes back newest first and
/// has n + 1 entries.
template <class W, class A>
Comp<MHSig<W, A>, std::vector<ChainNode<W, A>>> mh(int n, Trace tau0, ModelExec<W, A> exec,
                                                   Model<A> model) {
  if (n < 0) throw std::invalid_argument("mh: negative iteration count");
  auto run = std::make_shared<const detail::MHRun<W, A>>(n, std::move(exec), std::move(model));
  return chain(run->execute(std::move(tau0)), [run](const ChainNode<W, A>& node0) {
    return run->step(0, ConsList<ChainNode<W, A>>{}.push(node0));
  });
}

/// exp(ratio) >= u, with ratio >= 0 accepted without exponentiating. NaN
/// ratios reject.
bool accept_log_ratio(LogP ratio, double u);

/// Independence Metropolis acceptance: the likelihood ratio w' - w.
bool im_accepts(LogP current, LogP proposed, double u);

/// Single-site log acceptance ratio: the summed per-site differences over
/// addresses present in both LP traces, excluding the proposed site, plus
/// log |tau| - log |tau'|.
LogP ssmh_log_ratio(const LPTrace& current, const LPTrace& proposed, const Addr& site,
                    std::size_t current_trace_size, std::size_t proposed_trace_size);

/// Entries of `trace` whose address appears in `lps`.
Trace restrict_to(const Trace& trace, const LPTrace& lps);

namespace detail {

template <class S>
Comp<S, Trace> redraw(std::shared_ptr<const std::vector<Addr>> keys, std::size_t i,
                      ConsList<double> drawn) {
  if (i == keys->size()) {
    Trace out;
    auto values = drawn.oldest_first();
    for (std::size_t j = 0; j < keys->size(); ++j) out.emplace_hint(out.end(), (*keys)[j], values[j]);
    return Comp<S, Trace>::pure(std::move(out));
  }
  return chain(random_uniform<S>(), [keys, i, drawn](double r) {
    return redraw<S>(keys, i + 1, drawn.push(r));
  });
}

template <class S>
Comp<S, Trace> redraw_all(const Trace& trace) {
  auto keys = std::make_shared<std::vector<Addr>>();
  keys->reserve(trace.size());
  for (const auto& entry : trace) keys->push_back(entry.first);
  return redraw<S>(std::move(keys), 0, {});
}

}  // namespace detail

/// Independence Metropolis proposals: Propose redraws every entry of the
/// trace (same keys, fresh uniforms, in key order); Accept keeps the
/// proposal iff exp(w' - w) >= u for a fresh uniform u.
template <class A, class... Es, class R>
Comp<Sig<Es...>, R> handle_propose_im(const Comp<Sig<Propose<LogP, A>, Es...>, R>& c) {
  using Out = Comp<Sig<Es...>, R>;
  using P = Propose<LogP, A>;
  return handle_deep(
      c, [](const R& x) { return Out::pure(x); },
      [](const typename P::Op& op, const Resumption<Out>& k) -> Out {
        if (const auto* p = std::get_if<typename P::ProposeOp>(&op)) {
          return chain(detail::redraw_all<Sig<Es...>>(p->trace),
                       [k](const Trace& fresh) { return k(fresh); });
        }
        const auto& acc = std::get<typename P::AcceptOp>(op);
        return chain(random_uniform<Sig<Es...>>(), [k, acc](double u) {
          return k(im_accepts(acc.current.weight, acc.proposed.weight, u) ? acc.proposed
                                                                          : acc.current);
        });
      });
}

/// Single-site proposals. The handler state is the site chosen by the last
/// Propose; it starts as an unused sentinel.
template <class A, class... Es, class R>
Comp<Sig<Es...>, R> handle_propose_ssmh(const Comp<Sig<Propose<LPTrace, A>, Es...>, R>& c) {
  using Out = Comp<Sig<Es...>, R>;
  using P = Propose<LPTrace, A>;
  using Node = ChainNode<LPTrace, A>;
  using Inner = Sig<Es...>;
  return handle_stateful(
      c, Addr{"<unset>", -1}, [](const Addr&, const R& x) { return Out::pure(x); },
      [](const Addr& site, const typename P::Op& op,
         const StatefulResumption<Addr, Out>& k) -> Out {
        if (const auto* p = std::get_if<typename P::ProposeOp>(&op)) {
          if (p->trace.empty()) {
            throw NoSampleSites("single-site proposal on a trace with no sample sites");
          }
          return chain(random_uniform<Inner>(), [k, trace = p->trace](double pick) {
            auto it = std::next(trace.begin(),
                                static_cast<std::ptrdiff_t>(uniform_index(trace.size(), pick)));
            Addr chosen = it->first;
            return chain(random_uniform<Inner>(), [k, trace, chosen](double r) {
              Trace proposal = trace;
              proposal.insert_or_assign(chosen, r);
              return k(chosen, std::move(proposal));
            });
          });
        }
        const auto& acc = std::get<typename P::AcceptOp>(op);
        const LogP ratio = ssmh_log_ratio(acc.current.weight, acc.proposed.weight, site,
                                          acc.current.trace.size(), acc.proposed.trace.size());
        return chain(random_uniform<Inner>(), [k, acc, site, ratio](double u) {
          if (!accept_log_ratio(ratio, u)) return k(site, acc.current);
          const Node& prop = acc.proposed;
          return k(site, Node{prop.value, prop.weight, restrict_to(prop.trace, prop.weight)});
        });
      });
}

/// reuse_trace over likelihood: weight is the summed observe log-probability.
template <class A>
ModelExec<LogP, A> exec_model_im() {
  return [](const Trace& trace, const Model<A>& model, RandomSource& src) {
    auto [xw, t] = run_random(reuse_trace(trace, likelihood(assign_addresses(model))), src);
    return ChainNode<LogP, A>{std::move(xw.first), xw.second, std::move(t)};
  };
}

/// reuse_trace over default_observe over trace_log_probs: weight is the
/// per-site log-probability map.
template <class A>
ModelExec<LPTrace, A> exec_model_ssmh() {
  return [](const Trace& trace, const Model<A>& model, RandomSource& src) {
    auto [xw, t] = run_random(
        reuse_trace(trace, default_observe(trace_log_probs(assign_addresses(model)))), src);
    return ChainNode<LPTrace, A>{std::move(xw.first), std::move(xw.second), std::move(t)};
  };
}

/// Independence Metropolis from an empty trace. Newest first, n + 1 entries.
template <class A>
std::vector<ChainNode<LogP, A>> im(int n, const Model<A>& model, RandomSource& src) {
  return run_random(handle_propose_im<A>(mh<LogP, A>(n, Trace{}, exec_model_im<A>(), model)), src);
}

/// Single-Site Metropolis-Hastings from `trace` (empty, or pre-seeded).
template <class A>
std::vector<ChainNode<LPTrace, A>> ssmh(int n, const Trace& trace, const Model<A>& model,
                                        RandomSource& src) {
  return run_random(handle_propose_ssmh<A>(mh<LPTrace, A>(n, trace, exec_model_ssmh<A>(), model)),
                    src);
}

}  // namespace effinfer
