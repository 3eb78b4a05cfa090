#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/rational.hpp"

namespace kpsched {

inline constexpr std::size_t default_cycle_cap = 100000;

/// Elementary cycle, stored as the places it traverses.
///
/// `tokens` is M(c) for the marking the cycle was enumerated against and
/// `length` is L(c) counted in instants: the sum of the place communication
/// latencies and of the computation latencies of the traversed transitions.
/// On a plain graph `length == places.size()`.
struct cycle {
  std::vector<place_index> places;
  std::int64_t tokens = 0;
  std::int64_t length = 0;

  rational throughput() const { return {tokens, length}; }
  bool contains(place_index p) const { return std::find(places.begin(), places.end(), p) != places.end(); }

  friend bool operator==(const cycle&, const cycle&) = default;
};

namespace detail {

/// Tarjan's algorithm, iterative, over the transitions with `active(t)` set and
/// the places with `use(p)` set. Component ids are returned per transition
/// (npos for inactive ones).
template <class Active, class Use>
std::vector<std::size_t> strong_components(const marked_graph& g, Active active, Use use,
                                           std::size_t& count) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const std::size_t n = g.transition_count();
  std::vector<std::size_t> comp(n, npos), index(n, npos), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<transition_index> stack;
  std::size_t next_index = 0;
  count = 0;

  struct frame {
    transition_index v;
    std::size_t edge;
  };
  std::vector<frame> call;

  for (transition_index root = 0; root < n; ++root) {
    if (!active(root) || index[root] != npos) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      frame& f = call.back();
      const auto& outs = g.outputs(f.v);
      if (f.edge < outs.size()) {
        const place_index p = outs[f.edge++];
        if (!use(p)) continue;
        const transition_index w = g.place_at(p).to;
        if (!active(w)) continue;
        if (index[w] == npos) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const transition_index v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        transition_index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
    }
  }
  return comp;
}

inline std::int64_t cycle_length(const marked_graph& g, const std::vector<place_index>& places) {
  std::int64_t len = 0;
  for (const place_index p : places) {
    len += g.place_at(p).latency;
    len += g.transition_at(g.place_at(p).to).latency;
  }
  return len;
}

/// Johnson's elementary circuit enumeration on the transition multigraph whose
/// arcs are the places accepted by `use`. Parallel places yield distinct
/// cycles. `visit` receives each cycle as a place sequence starting at an
/// output place of the cycle's smallest transition; returning false stops the
/// enumeration.
template <class Use, class Visit>
void enumerate_circuits(const marked_graph& g, Use use, Visit visit) {
  const std::size_t n = g.transition_count();
  std::vector<bool> blocked(n, false);
  std::vector<std::vector<transition_index>> block_map(n);
  std::vector<place_index> path;
  std::vector<std::size_t> comp;
  bool stop = false;

  for (transition_index s = 0; s < n && !stop; ++s) {
    std::size_t count = 0;
    comp = strong_components(
        g, [s](transition_index t) { return t >= s; }, use, count);
    const std::size_t cs = comp[s];
    auto in_comp = [&](transition_index t) { return t >= s && comp[t] == cs; };

    bool has_arc = false;
    for (const place_index p : g.outputs(s))
      if (use(p) && in_comp(g.place_at(p).to)) has_arc = true;
    if (!has_arc) continue;

    for (transition_index v = s; v < n; ++v) {
      if (!in_comp(v)) continue;
      blocked[v] = false;
      block_map[v].clear();
    }

    std::function<void(transition_index)> unblock = [&](transition_index u) {
      blocked[u] = false;
      while (!block_map[u].empty()) {
        const transition_index w = block_map[u].back();
        block_map[u].pop_back();
        if (blocked[w]) unblock(w);
      }
    };

    std::function<bool(transition_index)> circuit = [&](transition_index v) -> bool {
      bool found = false;
      blocked[v] = true;
      for (const place_index p : g.outputs(v)) {
        if (stop) break;
        if (!use(p)) continue;
        const transition_index w = g.place_at(p).to;
        if (!in_comp(w)) continue;
        if (w == s) {
          path.push_back(p);
          if (!visit(path)) stop = true;
          path.pop_back();
          found = true;
        } else if (!blocked[w]) {
          path.push_back(p);
          if (circuit(w)) found = true;
          path.pop_back();
        }
      }
      if (found) {
        unblock(v);
      } else {
        for (const place_index p : g.outputs(v)) {
          if (!use(p)) continue;
          const transition_index w = g.place_at(p).to;
          if (!in_comp(w)) continue;
          auto& bm = block_map[w];
          if (std::find(bm.begin(), bm.end(), v) == bm.end()) bm.push_back(v);
        }
      }
      return found;
    };

    circuit(s);
  }
}

inline cycle make_cycle(const marked_graph& g, std::vector<place_index> places) {
  const auto smallest = std::min_element(places.begin(), places.end());
  std::rotate(places.begin(), smallest, places.end());
  cycle c;
  for (const place_index p : places) c.tokens += g.place_at(p).tokens;
  c.length = cycle_length(g, places);
  c.places = std::move(places);
  return c;
}

inline void sort_cycles(std::vector<cycle>& cycles) {
  std::sort(cycles.begin(), cycles.end(),
            [](const cycle& a, const cycle& b) { return a.places < b.places; });
}

}  // namespace detail

/// Elementary cycles restricted to the places accepted by `use`. Each cycle is
/// rotated to start at its smallest place index and the list is sorted
/// lexicographically on the place sequences.
template <class Use>
std::vector<cycle> elementary_cycles_if(const marked_graph& g, Use use, std::size_t cap = default_cycle_cap) {
  std::vector<cycle> out;
  bool overflow = false;
  detail::enumerate_circuits(g, use, [&](const std::vector<place_index>& path) {
    if (out.size() >= cap) {
      overflow = true;
      return false;
    }
    out.push_back(detail::make_cycle(g, path));
    return true;
  });
  if (overflow) throw cycle_limit_exceeded(cap);
  detail::sort_cycles(out);
  return out;
}

inline std::vector<cycle> elementary_cycles(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  return elementary_cycles_if(g, [](place_index) { return true; }, cap);
}

/// One strongly connected component, with the graph restricted to it.
struct component {
  std::vector<transition_index> transitions;  // indices in the parent graph, ascending
  std::vector<place_index> places;            // internal places, ascending
  marked_graph graph;                         // same ids as the parent
};

struct scc_decomposition_result {
  std::vector<component> components;      // ordered by smallest member transition
  std::vector<std::size_t> component_of;  // per transition of the parent
  std::vector<place_index> dac_places;    // places joining two different components
};

inline scc_decomposition_result scc_decomposition(const marked_graph& g) {
  std::size_t count = 0;
  const auto raw = detail::strong_components(
      g, [](transition_index) { return true; }, [](place_index) { return true; }, count);

  // renumber by smallest member so the order does not depend on Tarjan's finish order
  std::vector<std::size_t> first(count, static_cast<std::size_t>(-1));
  std::vector<std::size_t> order;
  for (transition_index t = 0; t < g.transition_count(); ++t)
    if (first[raw[t]] == static_cast<std::size_t>(-1)) {
      first[raw[t]] = order.size();
      order.push_back(raw[t]);
    }

  scc_decomposition_result r;
  r.component_of.resize(g.transition_count());
  r.components.resize(count);
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    const std::size_t c = first[raw[t]];
    r.component_of[t] = c;
    r.components[c].transitions.push_back(t);
  }
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& pl = g.place_at(p);
    const std::size_t a = r.component_of[pl.from];
    if (a == r.component_of[pl.to])
      r.components[a].places.push_back(p);
    else
      r.dac_places.push_back(p);
  }
  for (auto& c : r.components) {
    for (const transition_index t : c.transitions)
      c.graph.add_transition(g.transition_at(t).id, g.transition_at(t).latency);
    for (const place_index p : c.places) {
      const auto& pl = g.place_at(p);
      c.graph.add_place(pl.id, g.transition_at(pl.from).id, g.transition_at(pl.to).id, pl.tokens, pl.latency);
    }
  }
  return r;
}

inline bool is_strongly_connected(const marked_graph& g) {
  if (g.transition_count() == 0) return false;
  std::size_t count = 0;
  detail::strong_components(
      g, [](transition_index) { return true; }, [](place_index) { return true; }, count);
  return count == 1;
}

inline bool is_weakly_connected(const marked_graph& g) {
  const std::size_t n = g.transition_count();
  if (n == 0) return false;
  std::vector<std::vector<transition_index>> adj(n);
  for (const auto& p : g.places()) {
    adj[p.from].push_back(p.to);
    adj[p.to].push_back(p.from);
  }
  std::vector<bool> seen(n, false);
  std::vector<transition_index> todo{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!todo.empty()) {
    const transition_index v = todo.back();
    todo.pop_back();
    for (const transition_index w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        todo.push_back(w);
      }
  }
  return reached == n;
}

/// Live iff every cycle holds a token, i.e. the token-free places form no cycle.
inline bool is_live(const marked_graph& g) {
  std::size_t count = 0;
  auto empty = [&g](place_index p) { return g.place_at(p).tokens == 0; };
  const auto comp = detail::strong_components(
      g, [](transition_index) { return true; }, empty, count);
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& pl = g.place_at(p);
    if (pl.tokens == 0 && comp[pl.from] == comp[pl.to]) return false;
  }
  return true;
}

enum class connectivity { strongly_connected, simply_connected, disconnected };

inline const char* to_string(connectivity c) {
  switch (c) {
    case connectivity::strongly_connected: return "strongly connected";
    case connectivity::simply_connected: return "simply connected";
    case connectivity::disconnected: return "disconnected";
  }
  return "?";
}

inline connectivity classify(const marked_graph& g) {
  if (is_strongly_connected(g)) return connectivity::strongly_connected;
  if (is_weakly_connected(g)) return connectivity::simply_connected;
  return connectivity::disconnected;
}

struct validation_report {
  std::vector<std::string> violations;
  std::vector<cycle> dead_cycles;  // cycles without any token
  bool dead_cycles_truncated = false;
  connectivity shape = connectivity::disconnected;
  std::vector<transition_index> sources;
  std::vector<transition_index> sinks;

  bool structurally_valid() const { return violations.empty(); }
  bool live() const { return dead_cycles.empty(); }
  bool closed() const { return sources.empty() && sinks.empty(); }
  bool valid() const { return structurally_valid() && live(); }
};

inline constexpr std::size_t dead_cycle_report_cap = 64;

inline validation_report validate(const marked_graph& g) {
  validation_report r;
  if (g.transition_count() == 0) r.violations.push_back("graph has no transition");
  for (const auto& p : g.places()) {
    if (p.latency < 1) r.violations.push_back("place '" + p.id + "' has a communication latency below 1");
    if (p.tokens < 0) r.violations.push_back("place '" + p.id + "' has a negative token count");
  }
  for (const auto& t : g.transitions())
    if (t.latency < 0) r.violations.push_back("transition '" + t.id + "' has a negative latency");
  if (g.transition_count() == 0) return r;

  detail::enumerate_circuits(
      g, [&g](place_index p) { return g.place_at(p).tokens == 0; },
      [&](const std::vector<place_index>& path) {
        if (r.dead_cycles.size() >= dead_cycle_report_cap) {
          r.dead_cycles_truncated = true;
          return false;
        }
        r.dead_cycles.push_back(detail::make_cycle(g, path));
        return true;
      });
  detail::sort_cycles(r.dead_cycles);

  r.shape = classify(g);
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    if (g.is_source(t)) r.sources.push_back(t);
    if (g.is_sink(t)) r.sinks.push_back(t);
  }
  return r;
}

struct throughput_result {
  rational value;
  std::vector<cycle> critical;
};

/// Minimum cycle throughput over an already enumerated cycle set.
inline throughput_result throughput_of(const std::vector<cycle>& cycles) {
  if (cycles.empty()) throw not_strongly_connected("graph has no cycle");
  throughput_result r{cycles.front().throughput(), {}};
  for (const auto& c : cycles) r.value = std::min(r.value, c.throughput());
  for (const auto& c : cycles)
    if (c.throughput() == r.value) r.critical.push_back(c);
  return r;
}

/// Throughput of a live strongly connected graph and its critical cycles.
inline throughput_result throughput(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  if (!is_strongly_connected(g)) throw not_strongly_connected("throughput needs a strongly connected graph");
  if (!is_live(g)) throw not_live("graph has a cycle without token");
  return throughput_of(elementary_cycles(g, cap));
}

}  // namespace kpsched
