#pragma once

// Particle filter pattern: the pfilter skeleton over the Resample effect,
// plus the multinomial filter, the resample-move filter and particle
// Metropolis-Hastings.

#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "effinfer/components.hpp"
#include "effinfer/cons_list.hpp"
#include "effinfer/debug.hpp"
#include "effinfer/metropolis.hpp"
#include "effinfer/model.hpp"
#include "effinfer/numerics.hpp"
#include "effinfer/random.hpp"

namespace effinfer {

template <class W, class A>
using Particle = std::pair<Model<A>, W>;

/// Advances one particle to its next Observe on its own random source.
template <class W, class A>
using ModelStep = std::function<Particle<W, A>(const Particle<W, A>&, RandomSource&)>;

template <class W, class A>
struct Resample {
  struct ResampleOp {
    using effect = Resample;
    using result_type = std::vector<Particle<W, A>>;
    std::vector<Particle<W, A>> particles;
  };
  using Op = ResampleOp;
};

template <class W, class A>
using PFSig = Sig<Resample<W, A>, Random>;

/// Throws InvariantViolation unless every live particle is suspended at an
/// Observe with the same tag.
template <class W, class A>
void check_lockstep(const std::vector<Particle<W, A>>& pws) {
  const std::string* tag = nullptr;
  for (std::size_t i = 0; i < pws.size(); ++i) {
    const Model<A>& p = pws[i].first;
    if (p.is_value()) continue;
    if (!p.is_suspended()) {
      throw InvariantViolation("particle " + std::to_string(i) + " is not stopped at an observe");
    }
    if (tag == nullptr) {
      tag = &p.suspended_label();
    } else if (*tag != p.suspended_label()) {
      throw InvariantViolation("particles out of lockstep: '" + *tag + "' vs '" +
                               p.suspended_label() + "'");
    }
  }
}

namespace detail {

template <class W, class A>
class PFRun : public std::enable_shared_from_this<PFRun<W, A>> {
 public:
  using P = Particle<W, A>;
  using S = PFSig<W, A>;
  using Result = Comp<S, std::vector<std::pair<A, W>>>;

  explicit PFRun(ModelStep<W, A> step) : step_(std::move(step)) {}

  Result round(std::shared_ptr<const std::vector<P>> pws) const {
    auto self = this->shared_from_this();
    auto stepped = perform<S, std::vector<P>>([self, pws](RandomSource& src) {
      auto children = src.split(pws->size());
      std::vector<P> out;
      out.reserve(pws->size());
      for (std::size_t i = 0; i < pws->size(); ++i) out.push_back(self->step_((*pws)[i], children[i]));
      return out;
    });
    return chain(stepped, [self](const std::vector<P>& next) -> Result {
      if (auto results = done(next)) return Result::pure(std::move(*results));
      if (debug_checks_enabled()) check_lockstep(next);
      using Op = typename Resample<W, A>::ResampleOp;
      return chain(call<S>(Op{next}), [self](const std::vector<P>& resampled) {
        return self->round(std::make_shared<const std::vector<P>>(resampled));
      });
    });
  }

 private:
  ModelStep<W, A> step_;
};

}  // namespace detail

/// The particle filter skeleton: n copies of the model at weight w0, each
/// round stepping every particle to its next Observe and resampling, until
/// all particles have finished.
template <class W, class A>
Comp<PFSig<W, A>, std::vector<std::pair<A, W>>> pfilter(int n, W w0, ModelStep<W, A> step,
                                                        Model<A> model) {
  if (n <= 0) throw std::invalid_argument("pfilter: particle count must be positive");
  auto run = std::make_shared<const detail::PFRun<W, A>>(std::move(step));
  auto initial = std::make_shared<const std::vector<Particle<W, A>>>(
      static_cast<std::size_t>(n), Particle<W, A>{std::move(model), std::move(w0)});
  return run->round(std::move(initial));
}

namespace detail {

/// n = |ws| categorical draws on the normalised weights in one perform.
template <class S>
Comp<S, std::vector<std::size_t>> multinomial_indices(const std::vector<LogP>& ws) {
  auto table = std::make_shared<const CategoricalTable>(normalise(ws));
  const std::size_t n = ws.size();
  return perform<S, std::vector<std::size_t>>([table, n](RandomSource& src) {
    std::vector<std::size_t> out(n);
    for (auto& i : out) i = table->index(src.next_uniform());
    return out;
  });
}

}  // namespace detail

/// Multinomial resampling: n categorical draws on the normalised weights;
/// every survivor carries the mean weight so the evidence estimate survives.
template <class A, class... Es, class R>
Comp<Sig<Es...>, R> handle_resample_mul(const Comp<Sig<Resample<LogP, A>, Es...>, R>& c) {
  using Out = Comp<Sig<Es...>, R>;
  using P = Particle<LogP, A>;
  return handle_deep(
      c, [](const R& x) { return Out::pure(x); },
      [](const typename Resample<LogP, A>::ResampleOp& op, const Resumption<Out>& k) -> Out {
        std::vector<LogP> ws;
        ws.reserve(op.particles.size());
        for (const auto& p : op.particles) ws.push_back(p.second);
        const LogP mean = log_mean_exp(ws);
        auto idxs = detail::multinomial_indices<Sig<Es...>>(ws);
        return chain(idxs, [k, particles = op.particles, mean](const std::vector<std::size_t>& is) {
          std::vector<P> out;
          out.reserve(is.size());
          for (std::size_t i : is) out.emplace_back(particles[i].first, mean);
          return k(std::move(out));
        });
      });
}

/// advance under fresh Sample draws.
template <class A>
ModelStep<LogP, A> step_model_mul() {
  return [](const Particle<LogP, A>& p, RandomSource& src) {
    return run_random(default_sample(advance(p.second, p.first)), src);
  };
}

/// Multinomial particle filter. Each result carries the final log weight;
/// their log-mean-exp estimates the log evidence.
template <class A>
std::vector<std::pair<A, LogP>> mulpfilter(int n, const Model<A>& model, RandomSource& src) {
  return run_random(
      handle_resample_mul<A>(pfilter<LogP, A>(n, 0.0, step_model_mul<A>(), assign_addresses(model))),
      src);
}

namespace detail {

template <class A>
struct RMPFMoves {
  using P = Particle<PState, A>;
  int m;
  std::shared_ptr<const Model<Model<A>>> prefix;
  std::shared_ptr<const std::vector<Trace>> traces;
  std::vector<std::size_t> picked;
  LogP mean;
};

template <class S, class A>
Comp<S, std::vector<Particle<PState, A>>> move_particles(std::shared_ptr<const RMPFMoves<A>> job,
                                                         std::size_t i,
                                                         ConsList<Particle<PState, A>> acc) {
  using P = Particle<PState, A>;
  if (i == job->picked.size()) return Comp<S, std::vector<P>>::pure(acc.oldest_first());
  auto moved = perform<S, P>([job, i](RandomSource& src) {
    const Trace& start = (*job->traces)[job->picked[i]];
    auto history = ssmh(job->m, start, *job->prefix, src);
    const auto& head = history.front();
    return P{head.value, PState{job->mean, head.trace}};
  });
  return chain(moved, [job, i, acc](const P& p) { return move_particles<S, A>(job, i + 1, acc.push(p)); });
}

}  // namespace detail

/// Resample-move: multinomial resampling of traces, then m single-site MH
/// moves per survivor on the model suspended just after the observation the
/// particles have reached. The state counts completed rounds.
template <class A, class... Es, class R>
Comp<Sig<Es...>, R> handle_resample_rmpf(int m, const Model<A>& model,
                                         const Comp<Sig<Resample<PState, A>, Es...>, R>& c) {
  using Out = Comp<Sig<Es...>, R>;
  using Inner = Sig<Es...>;
  auto shared_model = std::make_shared<const Model<A>>(model);
  return handle_stateful(
      c, 0, [](int, const R& x) { return Out::pure(x); },
      [m, shared_model](int t, const typename Resample<PState, A>::ResampleOp& op,
                        const StatefulResumption<int, Out>& k) -> Out {
        std::vector<LogP> ws;
        auto traces = std::make_shared<std::vector<Trace>>();
        ws.reserve(op.particles.size());
        traces->reserve(op.particles.size());
        for (const auto& p : op.particles) {
          ws.push_back(p.second.weight);
          traces->push_back(p.second.trace);
        }
        const LogP mean = log_mean_exp(ws);
        auto idxs = detail::multinomial_indices<Inner>(ws);
        auto prefix = std::make_shared<const Model<Model<A>>>(suspend_through(t, *shared_model));
        return chain(idxs, [k, t, m, prefix, traces = std::shared_ptr<const std::vector<Trace>>(traces),
                            mean](const std::vector<std::size_t>& is) {
          auto job = std::make_shared<const detail::RMPFMoves<A>>(
              detail::RMPFMoves<A>{m, prefix, traces, is, mean});
          return chain(detail::move_particles<Inner, A>(job, 0, {}),
                       [k, t](const std::vector<Particle<PState, A>>& moved) {
                         return k(t + 1, moved);
                       });
        });
      });
}

/// advance under reuse_trace: previously visited sites keep their draws,
/// new ones are recorded in the particle's trace.
template <class A>
ModelStep<PState, A> step_model_rmpf() {
  return [](const Particle<PState, A>& p, RandomSource& src) {
    auto [pw, trace] = run_random(reuse_trace(p.second.trace, advance(p.second.weight, p.first)), src);
    return Particle<PState, A>{std::move(pw.first), PState{pw.second, std::move(trace)}};
  };
}

/// Resample-move particle filter with n particles and m moves per particle
/// per round.
template <class A>
std::vector<std::pair<A, PState>> rmpf(int n, int m, const Model<A>& model, RandomSource& src) {
  if (m < 0) throw std::invalid_argument("rmpf: negative move count");
  const Model<A> assigned = assign_addresses(model);
  return run_random(handle_resample_rmpf<A>(m, assigned,
                                            pfilter<PState, A>(n, PState{}, step_model_rmpf<A>(),
                                                               assigned)),
                    src);
}

/// A multinomial filter over the model with the sites in the given trace
/// pinned. Returns the input trace and the log-mean-exp of the particle
/// weights as the chain weight; the result is one particle picked by weight.
template <class A>
ModelExec<LogP, A> exec_model_pmh(int n) {
  return [n](const Trace& theta, const Model<A>& model, RandomSource& src) {
    auto pinned = std::make_shared<const Trace>(theta);
    ModelStep<LogP, A> step = [pinned](const Particle<LogP, A>& p, RandomSource& s) {
      auto [pw, unused] = run_random(reuse_trace(*pinned, advance(p.second, p.first)), s);
      return pw;
    };
    auto results = run_random(
        handle_resample_mul<A>(pfilter<LogP, A>(n, 0.0, step, assign_addresses(model))), src);
    std::vector<LogP> ws;
    ws.reserve(results.size());
    for (const auto& r : results) ws.push_back(r.second);
    const std::size_t idx = categorical(normalise(ws), src);
    return ChainNode<LogP, A>{results[idx].first, log_mean_exp(ws), theta};
  };
}

/// Sample-site tags that no address in `trace` carries.
std::vector<std::string> unknown_tags(const std::set<std::string>& tags, const Trace& trace);

/// Entries of `trace` whose tag is in `tags`.
Trace filter_tags(const Trace& trace, const std::set<std::string>& tags);

using WarningSink = std::function<void(const std::string&)>;

/// Writes "warning: <message>" to stderr.
void warn_stderr(const std::string& message);

/// Particle Metropolis-Hastings: IM over the sites tagged in `theta`, each
/// proposal scored by an n-particle filter over the remaining sites. The
/// initial theta values come from one run of the model on a split child of
/// src. Tags matching no sample site are reported through `warn`; if none
/// match, std::invalid_argument is thrown.
template <class A>
std::vector<ChainNode<LogP, A>> pmh(int m, int n, const std::set<std::string>& theta,
                                    const Model<A>& model, RandomSource& src,
                                    const WarningSink& warn = warn_stderr) {
  const Model<A> assigned = assign_addresses(model);
  RandomSource child = src.split();
  auto [unused, full] = run_random(reuse_trace(Trace{}, default_observe(assigned)), child);
  for (const auto& tag : unknown_tags(theta, full)) {
    warn("pmh: tag '" + tag + "' matches no sample site");
  }
  Trace pinned = filter_tags(full, theta);
  if (pinned.empty()) throw std::invalid_argument("pmh: no sample site matches the given tags");
  return run_random(handle_propose_im<A>(mh<LogP, A>(m, std::move(pinned), exec_model_pmh<A>(n),
                                                     assigned)),
                    src);
}

}  // namespace effinfer
