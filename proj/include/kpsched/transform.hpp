#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kpsched/analysis.hpp"
#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/rational.hpp"

namespace kpsched {

enum class origin_kind { original, expansion, equalization, closure };

inline const char* to_string(origin_kind k) {
  switch (k) {
    case origin_kind::original: return "original";
    case origin_kind::expansion: return "expansion";
    case origin_kind::equalization: return "equalization";
    case origin_kind::closure: return "closure";
  }
  return "?";
}

struct origin {
  std::string id;  // element of the source graph; empty for closure paths
  std::size_t ordinal = 0;
  origin_kind kind = origin_kind::original;

  bool synthetic() const { return kind != origin_kind::original; }
  friend bool operator==(const origin&, const origin&) = default;
};

/// Maps every element id of a rewritten graph to the element it came from.
class provenance_map {
 public:
  static provenance_map identity(const marked_graph& g) {
    provenance_map m;
    for (const auto& t : g.transitions()) m.set(t.id, {t.id, 0, origin_kind::original});
    for (const auto& p : g.places()) m.set(p.id, {p.id, 0, origin_kind::original});
    return m;
  }

  void set(const std::string& id, origin o) { entries_[id] = std::move(o); }

  const origin& at(const std::string& id) const {
    const auto it = entries_.find(id);
    if (it == entries_.end()) throw std::out_of_range("no provenance for '" + id + "'");
    return it->second;
  }
  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const std::map<std::string, origin>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// `later` maps ids of a graph built from the graph this map describes.
  /// The result maps those ids straight to the original elements.
  provenance_map then(const provenance_map& later) const {
    provenance_map out;
    for (const auto& [id, o] : later.entries_) {
      if (o.kind == origin_kind::closure || !contains(o.id)) {
        out.set(id, o);
        continue;
      }
      const origin& root = at(o.id);
      if (o.kind == origin_kind::original)
        out.set(id, root);
      else
        out.set(id, {root.id.empty() ? o.id : root.id, o.ordinal, o.kind});
    }
    return out;
  }

  /// Two-column table `new_id original_id`.
  std::string table() const {
    std::string s;
    for (const auto& [id, o] : entries_) s += id + " " + (o.id.empty() ? std::string("-") : o.id) + "\n";
    return s;
  }

  friend bool operator==(const provenance_map&, const provenance_map&) = default;

 private:
  std::map<std::string, origin> entries_;
};

template <class Graph>
struct transform_result {
  Graph graph;
  provenance_map provenance;
};

namespace detail {

inline std::string fresh_id(const marked_graph& g, std::string id) {
  while (g.has_id(id)) id += "'";
  return id;
}

}  // namespace detail

/// Rewrites latencies into plain elements. A place of latency n becomes n
/// places joined by n-1 transitions, with all of its tokens in the first one.
/// A transition of latency m becomes m+1 transitions joined by m empty places;
/// the first keeps the inputs and the last the outputs.
///
/// Synthetic ids: `x~t<i>` for transitions and `x~p<i>` for places derived
/// from element x. The first element of each chain keeps the original id.
inline transform_result<marked_graph> expand_latencies(const marked_graph& g) {
  marked_graph out;
  provenance_map prov;
  std::vector<transition_index> head(g.transition_count()), tail(g.transition_count());

  // reserve the original ids so synthetic names never shadow them
  auto taken = [&g, &out](const std::string& id) { return g.has_id(id) || out.has_id(id); };
  auto fresh = [&](std::string id) {
    while (taken(id)) id += "'";
    return id;
  };

  for (transition_index t = 0; t < g.transition_count(); ++t) {
    const auto& tr = g.transition_at(t);
    head[t] = out.add_transition(tr.id);
    prov.set(tr.id, {tr.id, 0, origin_kind::original});
    tail[t] = head[t];
    for (std::int64_t i = 1; i <= tr.latency; ++i) {
      const std::string tid = fresh(tr.id + "~t" + std::to_string(i));
      const std::string pid = fresh(tr.id + "~p" + std::to_string(i));
      const transition_index next = out.add_transition(tid);
      out.add_place(pid, tail[t], next, 0);
      prov.set(tid, {tr.id, static_cast<std::size_t>(i), origin_kind::expansion});
      prov.set(pid, {tr.id, static_cast<std::size_t>(i), origin_kind::expansion});
      tail[t] = next;
    }
  }

  // places after transitions so their ids cannot collide with a later chain name
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& pl = g.place_at(p);
    transition_index from = tail[pl.from];
    std::string pid = pl.id;
    for (std::int64_t i = 1; i < pl.latency; ++i) {
      const std::string tid = fresh(pl.id + "~t" + std::to_string(i));
      const transition_index mid = out.add_transition(tid);
      out.add_place(pid, from, mid, i == 1 ? pl.tokens : 0);
      prov.set(tid, {pl.id, static_cast<std::size_t>(i), origin_kind::expansion});
      prov.set(pid, {pl.id, static_cast<std::size_t>(i - 1), i == 1 ? origin_kind::original : origin_kind::expansion});
      from = mid;
      pid = fresh(pl.id + "~p" + std::to_string(i + 1));
    }
    out.add_place(pid, from, head[pl.to], pl.latency == 1 ? pl.tokens : 0);
    prov.set(pid, {pl.id, static_cast<std::size_t>(pl.latency - 1),
                   pl.latency == 1 ? origin_kind::original : origin_kind::expansion});
  }
  return {std::move(out), std::move(prov)};
}

/// Every place lies on a cycle c with M(c)/(L(c)+1) < theta <= M(c)/L(c).
/// Places outside any cycle (between components) are ignored.
inline std::vector<bool> equalization_coverage(const marked_graph& g, const std::vector<cycle>& cycles,
                                               rational theta) {
  std::vector<bool> covered(g.place_count(), false);
  for (const auto& c : cycles) {
    if (rational(c.tokens, c.length + 1) < theta && theta <= c.throughput())
      for (const place_index p : c.places) covered[p] = true;
  }
  return covered;
}

inline bool is_equalized(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  const auto cycles = elementary_cycles(g, cap);
  if (cycles.empty()) return true;
  const rational theta = throughput_of(cycles).value;
  const auto covered = equalization_coverage(g, cycles, theta);
  std::vector<bool> on_cycle(g.place_count(), false);
  for (const auto& c : cycles)
    for (const place_index p : c.places) on_cycle[p] = true;
  for (place_index p = 0; p < g.place_count(); ++p)
    if (on_cycle[p] && !covered[p]) return false;
  return true;
}

/// Inserts (place, dummy transition) pairs until every place lies on a cycle c
/// with M(c)/(L(c)+1) < throughput <= M(c)/L(c). The repaired place is the
/// uncovered place lengthening the most non-tight cycles, ties broken by the
/// smallest id. Insertions never create tokens and never lower the throughput.
///
/// Synthetic ids: place `x~e<n>` and dummy transition `x~d<n>` for the n-th
/// insertion rooted at original place x.
inline transform_result<marked_graph> equalize(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  if (!g.is_plain()) throw not_plain("equalization needs a plain graph; expand latencies first");
  if (!is_strongly_connected(g)) throw not_strongly_connected("equalization needs a strongly connected graph");
  if (!is_live(g)) throw not_live("equalization needs a live graph");

  marked_graph out = g;
  provenance_map prov = provenance_map::identity(g);
  std::vector<cycle> cycles = elementary_cycles(out, cap);
  const rational theta = throughput_of(cycles).value;
  std::map<std::string, std::size_t> insertions;  // per original place
  std::vector<std::string> root_of(out.place_count());
  for (place_index p = 0; p < out.place_count(); ++p) root_of[p] = out.place_at(p).id;

  // every insertion lengthens at least one cycle whose throughput stays >= theta
  std::int64_t budget = 0;
  for (const auto& c : cycles) budget += c.tokens * theta.den() / theta.num() + 1;

  for (std::int64_t round = 0;; ++round) {
    if (round > budget) throw internal_error("equalization did not converge");
    const auto covered = equalization_coverage(out, cycles, theta);
    std::vector<std::size_t> slack_hits(out.place_count(), 0);
    std::vector<bool> on_cycle(out.place_count(), false);
    for (const auto& c : cycles) {
      const bool tight = rational(c.tokens, c.length + 1) < theta;
      for (const place_index p : c.places) {
        on_cycle[p] = true;
        if (!tight) ++slack_hits[p];
      }
    }
    std::optional<place_index> pick;
    for (place_index p = 0; p < out.place_count(); ++p) {
      if (!on_cycle[p] || covered[p]) continue;
      if (!pick || slack_hits[p] > slack_hits[*pick] ||
          (slack_hits[p] == slack_hits[*pick] && out.place_at(p).id < out.place_at(*pick).id))
        pick = p;
    }
    if (!pick) break;

    const place_index q = *pick;
    for (const auto& c : cycles)
      if (c.contains(q) && rational(c.tokens, c.length + 1) < theta)
        throw internal_error("equalization would push a cycle below the throughput");

    const std::string root = root_of[q];
    const std::size_t n = ++insertions[root];
    const std::string did = detail::fresh_id(out, root + "~d" + std::to_string(n));
    const transition_index dummy = out.add_transition(did);
    const std::string eid = detail::fresh_id(out, root + "~e" + std::to_string(n));
    // q keeps its producer and tokens and now feeds the dummy; the new place takes over q's consumer
    marked_graph rebuilt;
    for (const auto& t : out.transitions()) rebuilt.add_transition(t.id, t.latency);
    for (place_index p = 0; p < out.place_count(); ++p) {
      const auto& pl = out.place_at(p);
      rebuilt.add_place(pl.id, pl.from, p == q ? dummy : pl.to, pl.tokens, pl.latency);
    }
    const place_index added = rebuilt.add_place(eid, dummy, out.place_at(q).to, 0, 1);
    out = std::move(rebuilt);
    root_of.push_back(root);
    prov.set(did, {root, n, origin_kind::equalization});
    prov.set(eid, {root, n, origin_kind::equalization});

    for (auto& c : cycles) {
      const auto it = std::find(c.places.begin(), c.places.end(), q);
      if (it == c.places.end()) continue;
      c.places.insert(it + 1, added);
      c.length += 1;
    }
  }
  return {std::move(out), std::move(prov)};
}

/// Makes a simply connected graph strongly connected by adding one feedback
/// place from every terminal component to every initial component that
/// reaches it. Feedback tokens start at zero and are raised until every new
/// elementary cycle is strictly faster than the slowest original component.
///
/// Synthetic ids: `fb~<from>~<to>` for the feedback places.
inline transform_result<marked_graph> close_graph(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  if (g.transition_count() == 0) throw structural_error("graph has no transition");
  provenance_map prov = provenance_map::identity(g);
  if (is_strongly_connected(g)) return {g, std::move(prov)};
  if (!is_weakly_connected(g)) throw not_strongly_connected("closure needs a connected graph");

  const auto scc = scc_decomposition(g);
  const std::size_t nc = scc.components.size();
  std::vector<std::vector<std::size_t>> succ(nc);
  std::vector<bool> has_in(nc, false), has_out(nc, false);
  for (const place_index p : scc.dac_places) {
    const auto a = scc.component_of[g.place_at(p).from];
    const auto b = scc.component_of[g.place_at(p).to];
    succ[a].push_back(b);
    has_out[a] = true;
    has_in[b] = true;
  }

  // slowest component throughput; components without a cycle do not bound it
  std::optional<rational> theta;
  for (const auto& c : scc.components) {
    const auto cycles = elementary_cycles(c.graph, cap);
    if (cycles.empty()) continue;
    if (!is_live(c.graph)) throw not_live("component containing '" + c.graph.transition_at(0).id + "' is not live");
    const rational r = throughput_of(cycles).value;
    if (!theta || r < *theta) theta = r;
  }
  if (!theta) theta = rational(1);

  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(nc, false);
    std::vector<std::size_t> todo{from};
    seen[from] = true;
    while (!todo.empty()) {
      const auto v = todo.back();
      todo.pop_back();
      if (v == to) return true;
      for (const auto w : succ[v])
        if (!seen[w]) {
          seen[w] = true;
          todo.push_back(w);
        }
    }
    return false;
  };

  marked_graph out = g;
  std::vector<place_index> feedback;
  std::size_t ordinal = 0;
  for (std::size_t sink = 0; sink < nc; ++sink) {
    if (has_out[sink]) continue;
    for (std::size_t source = 0; source < nc; ++source) {
      if (has_in[source] || source == sink || !reaches(source, sink)) continue;
      const transition_index from = scc.components[sink].transitions.front();
      const transition_index to = scc.components[source].transitions.front();
      const std::string id =
          detail::fresh_id(out, "fb~" + g.transition_at(from).id + "~" + g.transition_at(to).id);
      feedback.push_back(out.add_place(id, from, to, 0, 1));
      prov.set(id, {"", ++ordinal, origin_kind::closure});
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : elementary_cycles(out, cap)) {
      if (c.throughput() > *theta) continue;
      const auto fb = std::find_if(c.places.begin(), c.places.end(), [&](place_index p) {
        return std::find(feedback.begin(), feedback.end(), p) != feedback.end();
      });
      if (fb == c.places.end()) continue;
      // smallest m with (M + m) / L > theta
      const std::int64_t need = (theta->num() * c.length - c.tokens * theta->den()) / theta->den() + 1;
      out.set_tokens(*fb, out.place_at(*fb).tokens + std::max<std::int64_t>(need, 1));
      changed = true;
      break;
    }
  }
  return {std::move(out), std::move(prov)};
}

}  // namespace kpsched
