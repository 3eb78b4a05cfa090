#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "kpsched/kpsched.hpp"

namespace fixtures {

using kpsched::marked_graph;

/// Running example: computation latency on T, communication latency 3 on r3.
inline marked_graph running_example() {
  marked_graph g;
  g.add_transition("A");
  g.add_transition("B");
  g.add_transition("T", 1);
  g.add_transition("C");
  g.add_place("s", "A", "B", 1);
  g.add_place("l", "B", "A", 1);
  g.add_place("r1", "B", "T", 1);
  g.add_place("r2", "T", "C", 1);
  g.add_place("r3", "C", "A", 1, 3);
  return g;
}

/// Triangle a -> b -> c -> a with a three-place detour against each side.
/// Outer cycle 2/9, three 1/4 cycles, inner cycle 1/3.
inline marked_graph already_equalized() {
  marked_graph g;
  for (const char* t : {"a", "b", "c", "ba1", "ba2", "cb1", "cb2", "ac1", "ac2"}) g.add_transition(t);
  g.add_place("x1", "a", "b", 1);
  g.add_place("x2", "b", "c", 0);
  g.add_place("x3", "c", "a", 0);
  g.add_place("ba_0", "b", "ba1", 0);
  g.add_place("ba_1", "ba1", "ba2", 0);
  g.add_place("ba_2", "ba2", "a", 0);
  g.add_place("cb_0", "c", "cb1", 1);
  g.add_place("cb_1", "cb1", "cb2", 0);
  g.add_place("cb_2", "cb2", "b", 0);
  g.add_place("ac_0", "a", "ac1", 1);
  g.add_place("ac_1", "ac1", "ac2", 0);
  g.add_place("ac_2", "ac2", "c", 0);
  return g;
}

/// Single ring of `length` plain places carrying `tokens` tokens in the first places.
inline marked_graph ring(int length, int tokens) {
  marked_graph g;
  for (int i = 0; i < length; ++i) g.add_transition("t" + std::to_string(i));
  for (int i = 0; i < length; ++i)
    g.add_place("p" + std::to_string(i), static_cast<std::size_t>(i), static_cast<std::size_t>((i + 1) % length),
                i < tokens ? 1 : 0);
  return g;
}

/// Two rings joined by a one-way place: simply connected.
inline marked_graph two_rings() {
  marked_graph g;
  for (const char* t : {"a0", "a1", "b0", "b1"}) g.add_transition(t);
  g.add_place("pa0", "a0", "a1", 1);
  g.add_place("pa1", "a1", "a0", 0);
  g.add_place("pb0", "b0", "b1", 1);
  g.add_place("pb1", "b1", "b0", 1);
  g.add_place("link", "a1", "b0", 0);
  return g;
}

/// AES-style open pipeline: sources key and word, sink output_word, a six-stage
/// round loop and a six-stage key schedule loop, one token each.
inline marked_graph aes() {
  marked_graph g;
  for (const char* t : {"key", "word", "key_mux", "rot_word", "sub_word", "rcon", "key_xor", "key_reg", "mux",
                        "sub_bytes", "shift_rows", "mix_columns", "add_round_key", "round_reg", "output_word"})
    g.add_transition(t);
  g.add_place("key_in", "key", "key_mux", 0);
  g.add_place("word_in", "word", "mux", 0);
  g.add_place("k_sel", "key_mux", "rot_word", 0);
  g.add_place("k_rot", "rot_word", "sub_word", 0);
  g.add_place("k_sub", "sub_word", "rcon", 0);
  g.add_place("k_rcon", "rcon", "key_xor", 1);
  g.add_place("k_xor", "key_xor", "key_reg", 0);
  g.add_place("k_next", "key_reg", "key_mux", 0);
  g.add_place("round_key", "key_xor", "add_round_key", 0);
  g.add_place("state", "mux", "sub_bytes", 0);
  g.add_place("sub", "sub_bytes", "shift_rows", 0);
  g.add_place("shift", "shift_rows", "mix_columns", 1);
  g.add_place("mix", "mix_columns", "add_round_key", 0);
  g.add_place("round", "add_round_key", "round_reg", 0);
  g.add_place("feedback", "round_reg", "mux", 0);
  g.add_place("result", "add_round_key", "output_word", 0);
  return g;
}

/// Random live strongly connected plain graph: a ring through a random
/// permutation plus random chords, tokens in {0, 1}, then every token-free
/// cycle gets a token.
inline marked_graph random_graph(std::mt19937_64& rng, int max_transitions = 10, int max_places = 15) {
  std::uniform_int_distribution<int> nt_dist(2, max_transitions);
  const int n = nt_dist(rng);
  std::uniform_int_distribution<int> extra_dist(0, std::max(0, max_places - n));
  const int extra = extra_dist(rng);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution token(0.4);
  std::uniform_int_distribution<int> pick(0, n - 1);

  marked_graph g;
  for (int i = 0; i < n; ++i) g.add_transition("t" + std::to_string(i));
  int id = 0;
  for (int i = 0; i < n; ++i)
    g.add_place("p" + std::to_string(id++), static_cast<std::size_t>(order[static_cast<std::size_t>(i)]),
                static_cast<std::size_t>(order[static_cast<std::size_t>((i + 1) % n)]), token(rng) ? 1 : 0);
  for (int i = 0; i < extra; ++i)
    g.add_place("p" + std::to_string(id++), static_cast<std::size_t>(pick(rng)), static_cast<std::size_t>(pick(rng)),
                token(rng) ? 1 : 0);

  for (;;) {
    const auto dead = kpsched::elementary_cycles_if(
        g, [&](kpsched::place_index p) { return g.place_at(p).tokens == 0; });
    if (dead.empty()) break;
    g.set_tokens(dead.front().places.front(), 1);
  }
  return g;
}

/// The deterministic corpus shared by the property tests.
inline std::vector<marked_graph> corpus(std::size_t count, std::uint64_t seed = 20061017) {
  std::mt19937_64 rng(seed);
  std::vector<marked_graph> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_graph(rng));
  return out;
}

}  // namespace fixtures
