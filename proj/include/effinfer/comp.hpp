#pragma once

// Extensible computation trees.
//
// A Comp<Sig<E1, ..., En>, A> is either a value leaf holding an A, or a
// request node holding one operation of some effect Ei together with a
// resumption that builds the rest of the tree from the operation's result.
// Results cross the resumption boundary type-erased (std::any); the typed
// helpers below (call, Resumption) put the static types back.
//
// A third node kind, the suspended node, holds a resumption that has not
// been invoked yet together with its argument. Only the shallow walkers
// (advance, suspend_after) create these; force() runs them. A suspended node
// may also keep the request it stopped at, so reissue() can hand that
// request back to the handlers instead of answering it silently.

#include <any>
#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <variant>

namespace effinfer {

using Any = std::any;

/// Ordered effect signature. Handlers discharge the head effect.
template <class... Es>
struct Sig {};

/// Value for computations with no interesting result.
struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

namespace detail {

template <class E, class... Es>
inline constexpr bool contains_v = (std::is_same_v<E, Es> || ...);

template <class E, class... Es>
struct index_of;

template <class E, class First, class... Rest>
struct index_of<E, First, Rest...> {
  static constexpr std::size_t value =
      std::is_same_v<E, First> ? 0 : 1 + index_of<E, Rest...>::value;
};

template <class E>
struct index_of<E> {
  static constexpr std::size_t value = 0;
};

template <class E, class... Es>
inline constexpr std::size_t index_of_v = index_of<E, Es...>::value;

}  // namespace detail

/// An operation of exactly one effect in Es, tagged by the effect's position.
template <class... Es>
class EffectSum {
 public:
  template <std::size_t I, class Op>
  EffectSum(std::in_place_index_t<I> at, Op&& op)
      : payload_(at, std::forward<Op>(op)) {}

  template <class E>
  static EffectSum inject(typename E::Op op) {
    static_assert(detail::contains_v<E, Es...>, "effect not in signature");
    return EffectSum(std::in_place_index<detail::index_of_v<E, Es...>>,
                     std::move(op));
  }

  /// The payload if this operation belongs to E, otherwise nullptr.
  template <class E>
  const typename E::Op* project() const {
    static_assert(detail::contains_v<E, Es...>, "effect not in signature");
    constexpr std::size_t i = detail::index_of_v<E, Es...>;
    if (payload_.index() != i) return nullptr;
    return &std::get<i>(payload_);
  }

  std::size_t tag() const { return payload_.index(); }

  template <std::size_t I>
  const auto& get() const {
    return std::get<I>(payload_);
  }

 private:
  std::variant<typename Es::Op...> payload_;
};

/// The empty signature has no operations.
template <>
class EffectSum<> {
 public:
  EffectSum() = delete;
  std::size_t tag() const { return 0; }
};

/// Left(head payload) or Right(the same operation at the narrowed signature).
template <class E, class... Es>
using Decomposed = std::variant<typename E::Op, EffectSum<Es...>>;

template <class E, class... Es>
Decomposed<E, Es...> decompose(const EffectSum<E, Es...>& op) {
  if (op.tag() == 0) {
    return Decomposed<E, Es...>(std::in_place_index<0>, op.template get<0>());
  }
  if constexpr (sizeof...(Es) == 0) {
    throw std::logic_error("decompose: operation outside signature");
  } else {
    using Wide = EffectSum<E, Es...>;
    using Narrow = EffectSum<Es...>;
    using Fn = Narrow (*)(const Wide&);
    static constexpr auto table = []<std::size_t... I>(std::index_sequence<I...>) {
      return std::array<Fn, sizeof...(I)>{+[](const Wide& w) {
        return Narrow(std::in_place_index<I>, w.template get<I + 1>());
      }...};
    }(std::index_sequence_for<Es...>{});
    return Decomposed<E, Es...>(std::in_place_index<1>, table[op.tag() - 1](op));
  }
}

template <class S, class A>
class Comp;

template <class... Es, class A>
class Comp<Sig<Es...>, A> {
 public:
  using signature = Sig<Es...>;
  using value_type = A;
  using Request = EffectSum<Es...>;
  using Resume = std::function<Comp(Any)>;

  static Comp pure(A value) {
    return Comp(std::make_shared<const Node>(std::in_place_index<0>,
                                             ValueNode{std::move(value)}));
  }

  static Comp request(Request op, Resume resume) {
    return Comp(std::make_shared<const Node>(
        std::in_place_index<1>, RequestNode{std::move(op), std::move(resume)}));
  }

  /// A resumption that has not been invoked yet. `label` names the point of
  /// suspension for diagnostics.
  static Comp suspended(Resume resume, Any arg, std::string label = {},
                        std::optional<Request> pending = std::nullopt) {
    return Comp(std::make_shared<const Node>(
        std::in_place_index<2>, SuspendedNode{std::move(resume), std::move(arg), std::move(label),
                                              std::move(pending)}));
  }

  bool is_value() const { return node_->index() == 0; }
  bool is_request() const { return node_->index() == 1; }
  bool is_suspended() const { return node_->index() == 2; }

  const A& value() const { return std::get<0>(*node_).value; }
  const Request& op() const { return std::get<1>(*node_).op; }

  const Resume& resume() const {
    if (is_suspended()) return std::get<2>(*node_).resume;
    return std::get<1>(*node_).resume;
  }

  const Any& suspended_arg() const { return std::get<2>(*node_).arg; }
  const std::string& suspended_label() const { return std::get<2>(*node_).label; }
  const std::optional<Request>& suspended_request() const { return std::get<2>(*node_).pending; }

  /// A suspended node that kept its request becomes that request again,
  /// with the stored resumption. Anything else is returned unchanged.
  Comp reissue() const {
    if (is_suspended() && suspended_request()) return request(*suspended_request(), resume());
    return *this;
  }

  /// Runs pending resumptions until a value leaf or request node.
  Comp force() const {
    Comp c = *this;
    while (c.is_suspended()) c = c.resume()(c.suspended_arg());
    return c;
  }

 private:
  struct ValueNode {
    A value;
  };
  struct RequestNode {
    Request op;
    Resume resume;
  };
  struct SuspendedNode {
    Resume resume;
    Any arg;
    std::string label;
    std::optional<Request> pending;
  };
  using Node = std::variant<ValueNode, RequestNode, SuspendedNode>;

  explicit Comp(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

template <class C>
inline constexpr bool is_comp_v = false;
template <class S, class A>
inline constexpr bool is_comp_v<Comp<S, A>> = true;

namespace detail {

template <class... Es, class A, class F>
auto chain_shared(const Comp<Sig<Es...>, A>& c, std::shared_ptr<const F> f)
    -> std::invoke_result_t<const F&, const A&> {
  using Out = std::invoke_result_t<const F&, const A&>;
  if (c.is_value()) return (*f)(c.value());
  auto next = [k = c.resume(), f](Any x) {
    return chain_shared(k(std::move(x)), f);
  };
  if (c.is_request()) return Out::request(c.op(), std::move(next));
  std::optional<typename Out::Request> pending;
  if (c.suspended_request()) pending = *c.suspended_request();
  return Out::suspended(std::move(next), c.suspended_arg(), c.suspended_label(), std::move(pending));
}

}  // namespace detail

/// Sequencing: replaces every leaf x of c by f(x). Requests are untouched.
template <class... Es, class A, class F>
auto chain(const Comp<Sig<Es...>, A>& c, F f) {
  using Out = std::invoke_result_t<const F&, const A&>;
  static_assert(is_comp_v<Out>, "chain: continuation must return a Comp");
  static_assert(std::is_same_v<typename Out::signature, Sig<Es...>>,
                "chain: continuation must keep the signature");
  return detail::chain_shared(c, std::make_shared<const F>(std::move(f)));
}

/// chain followed by a pure leaf.
template <class... Es, class A, class F>
auto fmap(const Comp<Sig<Es...>, A>& c, F f) {
  using B = std::decay_t<std::invoke_result_t<const F&, const A&>>;
  using Out = Comp<Sig<Es...>, B>;
  return chain(c, [f = std::move(f)](const A& a) { return Out::pure(f(a)); });
}

template <class S, class A>
Comp<S, A> pure(A value) {
  return Comp<S, A>::pure(std::move(value));
}

/// Single-request tree for an operation struct that names its effect and
/// result type (`using effect = ...; using result_type = ...;`).
template <class S, class Op>
Comp<S, typename Op::result_type> call(Op op) {
  using E = typename Op::effect;
  using R = typename Op::result_type;
  using Out = Comp<S, R>;
  return Out::request(
      Out::Request::template inject<E>(typename E::Op(std::move(op))),
      [](Any x) { return Out::pure(std::any_cast<R>(std::move(x))); });
}

/// Typed view of a handler-side resumption.
template <class Out>
class Resumption {
 public:
  explicit Resumption(std::function<Out(Any)> fn) : fn_(std::move(fn)) {}

  template <class R>
  Out operator()(R&& result) const {
    return fn_(Any(std::forward<R>(result)));
  }

 private:
  std::function<Out(Any)> fn_;
};

/// Resumption that also takes the handler's next state.
template <class S, class Out>
class StatefulResumption {
 public:
  explicit StatefulResumption(std::function<Out(S, Any)> fn) : fn_(std::move(fn)) {}

  template <class R>
  Out operator()(S state, R&& result) const {
    return fn_(std::move(state), Any(std::forward<R>(result)));
  }

 private:
  std::function<Out(S, Any)> fn_;
};

namespace detail {

template <class E, class Rest, class A, class S, class HVal, class HOp>
class StatefulHandler;

template <class E, class... Es, class A, class S, class HVal, class HOp>
class StatefulHandler<E, Sig<Es...>, A, S, HVal, HOp>
    : public std::enable_shared_from_this<
          StatefulHandler<E, Sig<Es...>, A, S, HVal, HOp>> {
 public:
  using In = Comp<Sig<E, Es...>, A>;
  using Out = std::invoke_result_t<const HVal&, const S&, const A&>;

  StatefulHandler(HVal hval, HOp hop) : hval_(std::move(hval)), hop_(std::move(hop)) {}

  Out run(S state, In c) const {
    c = c.force();
    if (c.is_value()) return hval_(state, c.value());
    auto self = this->shared_from_this();
    auto k = c.resume();
    auto parts = decompose(c.op());
    if (parts.index() == 0) {
      StatefulResumption<S, Out> resume([self, k](S next, Any x) {
        return self->run(std::move(next), k(std::move(x)));
      });
      return hop_(state, std::get<0>(parts), resume);
    }
    return Out::request(std::get<1>(std::move(parts)),
                        [self, k, state = std::move(state)](Any x) {
                          return self->run(state, k(std::move(x)));
                        });
  }

 private:
  HVal hval_;
  HOp hop_;
};

}  // namespace detail

/// Stateful deep handler for the head effect E.
///
///   hval(state, value) -> Comp<Sig<Es...>, B>
///   hop(state, payload, StatefulResumption<S, Comp<Sig<Es...>, B>>) -> same
///
/// Foreign requests are re-emitted at the narrowed signature and leave the
/// state untouched.
template <class E, class... Es, class A, class S, class HVal, class HOp>
auto handle_stateful(const Comp<Sig<E, Es...>, A>& c, S s0, HVal hval, HOp hop) {
  using Handler = detail::StatefulHandler<E, Sig<Es...>, A, S, HVal, HOp>;
  using Out = typename Handler::Out;
  static_assert(is_comp_v<Out>, "hval must return a Comp");
  static_assert(std::is_same_v<typename Out::signature, Sig<Es...>>,
                "handler result must drop exactly the head effect");
  auto h = std::make_shared<const Handler>(std::move(hval), std::move(hop));
  return h->run(std::move(s0), c);
}

/// Deep handler for the head effect E: handle_stateful with unit state.
///
///   hval(value) -> Comp<Sig<Es...>, B>
///   hop(payload, Resumption<Comp<Sig<Es...>, B>>) -> same
template <class E, class... Es, class A, class HVal, class HOp>
auto handle_deep(const Comp<Sig<E, Es...>, A>& c, HVal hval, HOp hop) {
  using Out = std::invoke_result_t<const HVal&, const A&>;
  return handle_stateful(
      c, Unit{}, [hval = std::move(hval)](Unit, const A& x) { return hval(x); },
      [hop = std::move(hop)](Unit, const typename E::Op& op,
                             const StatefulResumption<Unit, Out>& k) {
        return hop(op, Resumption<Out>([k](Any x) { return k(Unit{}, std::move(x)); }));
      });
}

/// Extracts the value of a computation with no effects left.
template <class A>
A run_pure(const Comp<Sig<>, A>& c) {
  Comp<Sig<>, A> forced = c.force();
  return forced.value();
}

namespace detail {

// Rebuilds an operation of signature From at signature To, where every effect
// of From occurs in To.
template <class From, class To>
struct Reindex;

template <class... Fs, class... Ts>
struct Reindex<Sig<Fs...>, Sig<Ts...>> {
  using FromSum = EffectSum<Fs...>;
  using ToSum = EffectSum<Ts...>;

  static ToSum apply(const FromSum& op) {
    using Fn = ToSum (*)(const FromSum&);
    static constexpr auto table = []<std::size_t... I>(std::index_sequence<I...>) {
      return std::array<Fn, sizeof...(I)>{+[](const FromSum& f) {
        using E = std::tuple_element_t<I, std::tuple<Fs...>>;
        return ToSum::template inject<E>(f.template get<I>());
      }...};
    }(std::index_sequence_for<Fs...>{});
    return table[op.tag()](op);
  }
};

template <class From, class To, class A>
Comp<To, A> reindex(const Comp<From, A>& c) {
  Comp<From, A> forced = c.force();
  if (forced.is_value()) return Comp<To, A>::pure(forced.value());
  return Comp<To, A>::request(
      Reindex<From, To>::apply(forced.op()),
      [k = forced.resume()](Any x) { return reindex<From, To>(k(std::move(x))); });
}

template <class E, class Acc, class... Es>
struct Remove;
template <class E, class... Acc>
struct Remove<E, Sig<Acc...>> {
  using type = Sig<Acc...>;
};
template <class E, class... Acc, class First, class... Rest>
struct Remove<E, Sig<Acc...>, First, Rest...> {
  using type = std::conditional_t<std::is_same_v<E, First>,
                                  typename Remove<E, Sig<Acc...>, Rest...>::type,
                                  typename Remove<E, Sig<Acc..., First>, Rest...>::type>;
};

template <class E, class S>
struct PrependTo;
template <class E, class... Es>
struct PrependTo<E, Sig<Es...>> {
  using type = Sig<E, Es...>;
};

}  // namespace detail

/// Signature with E moved to the head.
template <class E, class S>
struct MoveToHead;
template <class E, class... Es>
struct MoveToHead<E, Sig<Es...>> {
  static_assert(detail::contains_v<E, Es...>, "effect not in signature");
  using type =
      typename detail::PrependTo<E, typename detail::Remove<E, Sig<>, Es...>::type>::type;
};

/// Reorders the signature so that E becomes the head, ready to be handled.
template <class E, class... Es, class A>
auto move_to_head(const Comp<Sig<Es...>, A>& c) {
  return detail::reindex<Sig<Es...>, typename MoveToHead<E, Sig<Es...>>::type>(c);
}

/// Adds an unused effect E at the head of the signature.
template <class E, class... Es, class A>
Comp<Sig<E, Es...>, A> weaken(const Comp<Sig<Es...>, A>& c) {
  return detail::reindex<Sig<Es...>, Sig<E, Es...>>(c);
}

}  // namespace effinfer
