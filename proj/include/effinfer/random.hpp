#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "effinfer/comp.hpp"

namespace effinfer {

/// Seeded, splittable source of uniforms.
///
/// Algorithm (pinned, bit-exact on every platform):
///   - state: xoshiro256** (Blackman & Vigna), four 64-bit words
///   - seeding: the four words are successive SplitMix64 outputs of the seed
///   - next_uniform: ((next_u64() >> 11) + 0.5) * 2^-53, which lies in (0, 1)
///   - split: a child seeded with the parent's next_u64()
///
/// A source is single-owner. Concurrent work gets its own split() child.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_uniform();

  RandomSource split();
  std::vector<RandomSource> split(std::size_t count);

  friend bool operator==(const RandomSource&, const RandomSource&) = default;

 private:
  std::array<std::uint64_t, 4> state_;
};

/// Action run outside the computation tree on its own child source.
template <class T>
using Action = std::function<T(RandomSource&)>;

/// The randomness effect. Uniform draws one number in [0,1); Perform runs an
/// external action (a nested inference run, a round of particle steps) on a
/// child source split off the running source.
struct Random {
  struct Uniform {
    using effect = Random;
    using result_type = double;
  };
  struct Perform {
    std::function<Any(RandomSource&)> action;
  };
  using Op = std::variant<Uniform, Perform>;
};

template <class S>
Comp<S, double> random_uniform() {
  return call<S>(Random::Uniform{});
}

/// Inserts an external action into the tree; its result resumes the tree.
template <class S, class T>
Comp<S, T> perform(Action<T> action) {
  using Out = Comp<S, T>;
  Random::Perform op{[action = std::move(action)](RandomSource& src) {
    return Any(action(src));
  }};
  return Out::request(Out::Request::template inject<Random>(Random::Op(std::move(op))),
                      [](Any x) { return Out::pure(std::any_cast<T>(std::move(x))); });
}

/// Discharges the final Random effect: one uniform per Uniform request in tree
/// order, one split child per Perform request.
template <class A>
A run_random(Comp<Sig<Random>, A> c, RandomSource& src) {
  for (;;) {
    c = c.force();
    if (c.is_value()) return c.value();
    const auto& op = c.op().template get<0>();
    if (std::holds_alternative<Random::Uniform>(op)) {
      c = c.resume()(Any(src.next_uniform()));
    } else {
      RandomSource child = src.split();
      c = c.resume()(std::get<Random::Perform>(op).action(child));
    }
  }
}

}  // namespace effinfer
