#pragma once

// Enumerated small computation trees over two toy effects, a canonical
// printer that explores every branch, and the handler-law checks run on
// them.

#include <any>
#include <functional>
#include <string>
#include <vector>

#include "effinfer/comp.hpp"

namespace laws {

using effinfer::Any;
using effinfer::Comp;
using effinfer::Sig;
using effinfer::Unit;

struct Flip {
  struct Op {
    using effect = Flip;
    using result_type = bool;
  };
};

struct Tell {
  struct Op {
    using effect = Tell;
    using result_type = Unit;
    int n = 0;
  };
};

using S = Sig<Tell, Flip>;
using Tree = Comp<S, int>;

inline Tree flip_node(Tree on_true, Tree on_false) {
  return Tree::request(Tree::Request::inject<Flip>(Flip::Op{}),
                       [on_true, on_false](Any x) { return std::any_cast<bool>(x) ? on_true : on_false; });
}

inline Tree tell_node(int n, Tree rest) {
  return Tree::request(Tree::Request::inject<Tell>(Tell::Op{n}), [rest](Any) { return rest; });
}

/// All trees with at most `max_nodes` nodes; leaves hold 0 or 1 and Tell
/// carries 1 or 2.
inline std::vector<Tree> enumerate(int max_nodes) {
  // by_size[s]: trees with exactly s nodes.
  std::vector<std::vector<Tree>> by_size(max_nodes + 1);
  if (max_nodes >= 1) by_size[1] = {Tree::pure(0), Tree::pure(1)};
  for (int s = 2; s <= max_nodes; ++s) {
    for (const auto& sub : by_size[s - 1]) {
      by_size[s].push_back(tell_node(1, sub));
      by_size[s].push_back(tell_node(2, sub));
    }
    for (int left = 1; left <= s - 2; ++left) {
      for (const auto& l : by_size[left]) {
        for (const auto& r : by_size[s - 1 - left]) by_size[s].push_back(flip_node(l, r));
      }
    }
  }
  std::vector<Tree> out;
  for (const auto& group : by_size) out.insert(out.end(), group.begin(), group.end());
  return out;
}

/// Canonical form: every Flip branch is explored.
template <class... Es>
std::string show(const Comp<Sig<Es...>, int>& c) {
  auto cur = c.force();
  if (cur.is_value()) return "V" + std::to_string(cur.value());
  const auto& op = cur.op();
  if constexpr ((std::is_same_v<Es, Tell> || ...)) {
    if (const auto* t = op.template project<Tell>()) {
      return "T" + std::to_string(t->n) + "(" + show(cur.resume()(Any(Unit{}))) + ")";
    }
  }
  if constexpr ((std::is_same_v<Es, Flip> || ...)) {
    if (op.template project<Flip>()) {
      return "F(" + show(cur.resume()(Any(true))) + "," + show(cur.resume()(Any(false))) + ")";
    }
  }
  return "?";
}

using Kont = std::function<Tree(int)>;

inline std::vector<Kont> continuations() {
  return {
      [](int x) { return Tree::pure(x + 1); },
      [](int x) { return tell_node(x + 1, Tree::pure(2 * x)); },
      [](int x) { return flip_node(Tree::pure(x), Tree::pure(-x)); },
      [](int x) { return x == 0 ? Tree::pure(7) : tell_node(2, flip_node(Tree::pure(x), Tree::pure(3))); },
  };
}

struct Tally {
  int checks = 0;
  int failures = 0;
  void expect(bool ok) {
    ++checks;
    if (!ok) ++failures;
  }
};

/// Left/right identity and associativity of chain on every enumerated tree.
inline Tally monad_laws(int max_nodes) {
  Tally t;
  const auto trees = enumerate(max_nodes);
  const auto ks = continuations();
  auto ret = [](int x) { return Tree::pure(x); };
  for (int a : {0, 1, 5}) {
    for (const auto& f : ks) t.expect(show(effinfer::chain(Tree::pure(a), f)) == show(f(a)));
  }
  for (const auto& m : trees) {
    t.expect(show(effinfer::chain(m, ret)) == show(m));
    for (const auto& f : ks) {
      for (const auto& g : ks) {
        auto lhs = effinfer::chain(effinfer::chain(m, f), g);
        auto rhs = effinfer::chain(m, [f, g](int x) { return effinfer::chain(f(x), g); });
        t.expect(show(lhs) == show(rhs));
      }
    }
  }
  return t;
}

/// Reference semantics for a Tell-summing handler, computed on the
/// canonical form: each Flip path yields (leaf, sum of Tells on the path).
inline void reference_paths(const Tree& c, int sum, std::vector<std::pair<int, int>>& out) {
  auto cur = c.force();
  if (cur.is_value()) {
    out.emplace_back(cur.value(), sum);
    return;
  }
  if (const auto* tell = cur.op().project<Tell>()) {
    reference_paths(cur.resume()(Any(Unit{})), sum + tell->n, out);
    return;
  }
  reference_paths(cur.resume()(Any(true)), sum, out);
  reference_paths(cur.resume()(Any(false)), sum, out);
}

using Handled = Comp<Sig<Flip>, std::pair<int, int>>;

inline void handled_paths(const Handled& c, std::vector<std::pair<int, int>>& out) {
  auto cur = c.force();
  if (cur.is_value()) {
    out.push_back(cur.value());
    return;
  }
  handled_paths(cur.resume()(Any(true)), out);
  handled_paths(cur.resume()(Any(false)), out);
}

inline Handled sum_tells(const Tree& c) {
  return effinfer::handle_stateful(
      c, 0, [](int s, int x) { return Handled::pure({x, s}); },
      [](int s, const Tell::Op& op, const effinfer::StatefulResumption<int, Handled>& k) {
        return k(s + op.n, Unit{});
      });
}

/// A deep handler discharges every Tell: its output mentions Flip only and
/// agrees path by path with the reference semantics.
inline Tally deep_handler_completeness(int max_nodes) {
  Tally t;
  for (const auto& m : enumerate(max_nodes)) {
    std::vector<std::pair<int, int>> want;
    std::vector<std::pair<int, int>> got;
    reference_paths(m, 0, want);
    handled_paths(sum_tells(m), got);
    t.expect(want == got);
    auto counted = effinfer::handle_deep(
        m, [](int x) { return Comp<Sig<Flip>, int>::pure(x); },
        [](const Tell::Op&, const effinfer::Resumption<Comp<Sig<Flip>, int>>& k) {
          return k(Unit{});
        });
    t.expect(show(counted).find('T') == std::string::npos);
  }
  return t;
}

/// inject then decompose gives back the payload at the right side, and
/// reinjecting the narrowed sum keeps the tag.
inline Tally decompose_round_trips() {
  Tally t;
  using Wide = effinfer::EffectSum<Tell, Flip>;
  for (int n : {0, 1, -3, 42}) {
    Wide op = Wide::inject<Tell>(Tell::Op{n});
    auto parts = effinfer::decompose(op);
    t.expect(parts.index() == 0 && std::get<0>(parts).n == n);
    t.expect(op.tag() == 0 && op.project<Tell>()->n == n && op.project<Flip>() == nullptr);
  }
  Wide flip = Wide::inject<Flip>(Flip::Op{});
  auto parts = effinfer::decompose(flip);
  t.expect(parts.index() == 1);
  if (parts.index() == 1) {
    const auto& narrow = std::get<1>(parts);
    t.expect(narrow.tag() == 0 && narrow.project<Flip>() != nullptr);
    auto back = effinfer::EffectSum<Tell, Flip>::inject<Flip>(*narrow.project<Flip>());
    t.expect(back.tag() == flip.tag());
  }
  return t;
}

}  // namespace laws
