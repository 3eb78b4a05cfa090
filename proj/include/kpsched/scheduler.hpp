#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpsched/analysis.hpp"
#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/rational.hpp"
#include "kpsched/simulator.hpp"
#include "kpsched/transform.hpp"
#include "kpsched/words.hpp"

namespace kpsched {

struct periodicity {
  std::int64_t k = 0;
  std::int64_t p = 0;

  std::int64_t r() const { return std::gcd(k, p); }
  std::int64_t k_root() const { return k / r(); }
  std::int64_t p_root() const { return p / r(); }
  friend bool operator==(const periodicity&, const periodicity&) = default;
};

namespace detail {

inline void require_schedulable(const marked_graph& g) {
  if (!g.is_plain()) throw not_plain("scheduling needs a plain graph; expand latencies first");
  if (g.transition_count() == 0) throw structural_error("graph has no transition");
  if (!is_strongly_connected(g)) throw not_strongly_connected("scheduling needs a strongly connected graph; close it first");
  if (!is_live(g)) throw not_live("graph is not live");
}

}  // namespace detail

/// k is the gcd of the token counts and p the gcd of the lengths of the critical cycles.
inline periodicity compute_k_p(const marked_graph& g, std::size_t cap = default_cycle_cap) {
  detail::require_schedulable(g);
  const auto tp = throughput_of(elementary_cycles(g, cap));
  if (tp.value > rational(1)) throw throughput_too_high("throughput " + tp.value.str() + " exceeds one firing per instant");
  periodicity out;
  for (const auto& c : tp.critical) {
    out.k = std::gcd(out.k, c.tokens);
    out.p = std::gcd(out.p, c.length);
  }
  return out;
}

/// Latest delays position. `full` is scaled to the (k, p) period; `root` to
/// the primitive period (k/r, p/r), which is what schedule propagation uses.
struct delay_distribution {
  std::vector<std::int64_t> full;
  std::vector<std::int64_t> root;
};

inline bool is_latest_position(const marked_graph& g, const std::vector<std::int64_t>& d) {
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    const auto& in = g.inputs(t);
    if (!in.empty() && std::none_of(in.begin(), in.end(), [&](place_index p) { return d[p] == 0; })) return false;
  }
  return true;
}

/// Moves delays forward until every transition has a delay-free input place.
/// `bound` limits the number of sweeps over the transitions.
inline std::vector<std::int64_t> forward_delays(const marked_graph& g, std::vector<std::int64_t> d,
                                                std::int64_t bound) {
  for (std::int64_t round = 0;; ++round) {
    bool moved = false;
    for (transition_index t = 0; t < g.transition_count(); ++t) {
      const auto& in = g.inputs(t);
      if (in.empty()) continue;
      std::int64_t fwd = d[in.front()];
      for (const place_index p : in) fwd = std::min(fwd, d[p]);
      if (fwd <= 0) continue;
      for (const place_index p : in) d[p] -= fwd;
      for (const place_index p : g.outputs(t)) d[p] += fwd;
      moved = true;
    }
    if (!moved) return d;
    if (round >= bound) throw internal_error("delay forwarding did not reach the latest position");
  }
}

/// Runs ASAP from the initial marking, measures the delays over one steady
/// period and forwards them to the latest position.
inline delay_distribution compute_D(const marked_graph& g, const periodicity& kp,
                                    std::optional<std::size_t> horizon = std::nullopt) {
  detail::require_schedulable(g);
  const auto run = run_asap(g, g.initial_marking(), horizon);
  const auto& cert = run.certificate;
  auto measured = measure_delays(g, run.trace, cert);
  const auto bound = static_cast<std::int64_t>(g.place_count()) *
                     std::max<std::int64_t>(static_cast<std::int64_t>(cert.k), 1);
  measured = forward_delays(g, std::move(measured), bound);

  // the simulated period is a multiple of the primitive one
  const auto sim_p = static_cast<std::int64_t>(cert.p);
  if (sim_p % kp.p_root() != 0)
    throw internal_error("simulated period " + std::to_string(sim_p) + " is not a multiple of " +
                         std::to_string(kp.p_root()));
  const std::int64_t sim_x = sim_p / kp.p_root();
  delay_distribution out;
  out.root.resize(g.place_count());
  out.full.resize(g.place_count());
  for (place_index p = 0; p < g.place_count(); ++p) {
    if (measured[p] % sim_x != 0) throw internal_error("delays do not divide evenly over the simulated period");
    out.root[p] = measured[p] / sim_x;
    out.full[p] = out.root[p] * kp.r();
  }
  return out;
}

enum class traversal { breadth_first, depth_first };

struct propagation_options {
  std::optional<std::string> seed_transition;  // defaults to the smallest id
  std::optional<binary_word> seed_word;        // defaults to the mechanical word
  traversal order = traversal::breadth_first;
};

/// Steady words of every transition, each of length p. A successor across
/// place q gets rho^(1 - D(q) alpha) of its predecessor's word.
inline std::vector<binary_word> compute_exec_periodic(const marked_graph& g, const delay_distribution& d,
                                                      const periodicity& kp, const propagation_options& opt = {}) {
  const std::int64_t k1 = kp.k_root(), p1 = kp.p_root();
  binary_word seed = opt.seed_word ? *opt.seed_word : mechanical_word(k1, p1);
  if (seed.size() == static_cast<std::size_t>(kp.p) && kp.r() > 1) seed = primitive_root(seed).first;
  if (seed.size() != static_cast<std::size_t>(p1) || seed.ones() != static_cast<std::size_t>(k1) || !is_balanced(seed))
    throw not_balanced("seed word " + seed.str() + " is not in S_" + std::to_string(k1) + "^" + std::to_string(p1));
  const std::int64_t a = k1 < p1 ? alpha(k1, p1).value : 0;

  transition_index start = 0;
  if (opt.seed_transition) {
    const auto t = g.find_transition(*opt.seed_transition);
    if (!t) throw structural_error("unknown seed transition '" + *opt.seed_transition + "'");
    start = *t;
  } else {
    for (transition_index t = 1; t < g.transition_count(); ++t)
      if (g.transition_at(t).id < g.transition_at(start).id) start = t;
  }

  std::vector<std::optional<binary_word>> word(g.transition_count());
  word[start] = seed;
  std::deque<transition_index> todo{start};
  while (!todo.empty()) {
    transition_index t;
    if (opt.order == traversal::breadth_first) {
      t = todo.front();
      todo.pop_front();
    } else {
      t = todo.back();
      todo.pop_back();
    }
    for (const place_index q : g.outputs(t)) {
      const transition_index next = g.place_at(q).to;
      binary_word w = rotate(*word[t], 1 - d.root[q] * a);
      if (!word[next]) {
        word[next] = std::move(w);
        todo.push_back(next);
      } else if (*word[next] != w) {
        throw inconsistent_propagation("transition '" + g.transition_at(next).id + "' gets both " +
                                       word[next]->str() + " and " + w.str());
      }
    }
  }
  std::vector<binary_word> out;
  out.reserve(g.transition_count());
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    if (!word[t]) throw internal_error("transition '" + g.transition_at(t).id + "' was not reached");
    out.push_back(word[t]->power(static_cast<std::size_t>(kp.r())));
  }
  return out;
}

/// Tokens at the start of the steady period: the producer's last letter plus
/// one if the place delays a token, which happens exactly when rho(u) < v.
inline marking compute_m_periodic(const marked_graph& g, const std::vector<binary_word>& words) {
  marking m(g.place_count(), 0);
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& u = primitive_root(words[g.place_at(p).from]).first;
    const auto& v = primitive_root(words[g.place_at(p).to]).first;
    m[p] = (u(u.size()) ? 1 : 0) + (rotate(u, 1) < v ? 1 : 0);
  }
  return m;
}

/// Firing counts taking m0 to target: F(from) = F(to) + target - m0 on every
/// place, shifted so the smallest count is zero.
inline std::vector<std::int64_t> firing_counts(const marked_graph& g, const marking& m0, const marking& target) {
  const std::size_t n = g.transition_count();
  std::vector<std::optional<std::int64_t>> f(n);
  for (transition_index root = 0; root < n; ++root) {
    if (f[root]) continue;
    f[root] = 0;
    std::vector<transition_index> todo{root};
    while (!todo.empty()) {
      const auto t = todo.back();
      todo.pop_back();
      auto visit = [&](transition_index other, std::int64_t value) {
        if (!f[other]) {
          f[other] = value;
          todo.push_back(other);
        } else if (*f[other] != value) {
          throw infeasible_initialization("no firing vector reaches the target marking");
        }
      };
      for (const place_index p : g.outputs(t)) visit(g.place_at(p).to, *f[t] - (target[p] - m0[p]));
      for (const place_index p : g.inputs(t)) visit(g.place_at(p).from, *f[t] + (target[p] - m0[p]));
    }
  }
  std::int64_t low = 0;
  for (const auto& x : f) low = std::min(low, *x);
  std::vector<std::int64_t> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = *f[t] - low;
  return out;
}

/// Capped ASAP: fire every firable transition that still has firings left.
/// With `capacity`, a transition is also held back while firing it would push
/// one of its output places past the bound; the largest consistent set of
/// firings is kept.
inline std::vector<firing_set> build_execution(const marked_graph& g, const marking& m0, std::vector<std::int64_t> budget,
                                               const std::vector<std::int64_t>* capacity = nullptr) {
  std::vector<firing_set> steps;
  marking m = m0;
  for (;;) {
    if (std::all_of(budget.begin(), budget.end(), [](std::int64_t b) { return b == 0; })) return steps;
    firing_set ft = firable(g, m);
    for (transition_index t = 0; t < g.transition_count(); ++t) ft[t] = ft[t] && budget[t] > 0;
    for (bool changed = capacity != nullptr; changed;) {
      changed = false;
      for (transition_index t = 0; t < g.transition_count(); ++t) {
        if (!ft[t]) continue;
        for (const place_index q : g.outputs(t)) {
          const auto& pl = g.place_at(q);
          if (m[q] + 1 - (ft[pl.to] ? 1 : 0) > (*capacity)[q]) {
            ft[t] = false;
            changed = true;
            break;
          }
        }
      }
    }
    if (std::none_of(ft.begin(), ft.end(), [](bool b) { return b; }))
      throw infeasible_initialization("initialization stalls before reaching the target marking");
    for (transition_index t = 0; t < g.transition_count(); ++t) budget[t] -= ft[t] ? 1 : 0;
    m = step_guided(g, m, ft);
    steps.push_back(std::move(ft));
  }
}

struct initialization {
  std::vector<firing_set> steps;
  std::vector<std::int64_t> counts;
  marking target;
  std::size_t phase = 0;  // index of the target on the steady orbit
};

/// Markings visited by the steady words over one period, starting at m_periodic.
inline std::vector<marking> steady_orbit(const marked_graph& g, const marking& m_periodic,
                                         const std::vector<binary_word>& words) {
  const std::size_t p = words.empty() ? 0 : words.front().size();
  std::vector<firing_set> sets(p, firing_set(g.transition_count(), false));
  for (std::size_t i = 0; i < p; ++i)
    for (transition_index t = 0; t < g.transition_count(); ++t) sets[i][t] = words[t](i + 1);
  auto trace = run_guided(g, m_periodic, sets);
  trace.markings.pop_back();
  return trace.markings;
}

/// Shortest cheap way into the steady regime: among all markings of the
/// steady orbit, the target with the fewest firings, then the fewest steps,
/// then the earliest phase. When `sizes` is given, executions that keep every
/// place within max(size, initial tokens) are preferred over any other.
inline initialization compute_exec_initial(const marked_graph& g, const marking& m0, const std::vector<marking>& orbit,
                                           const std::vector<int>* sizes = nullptr) {
  std::optional<std::vector<std::int64_t>> capacity;
  if (sizes) {
    capacity.emplace(m0.size());
    for (place_index q = 0; q < m0.size(); ++q) (*capacity)[q] = std::max<std::int64_t>((*sizes)[q], m0[q]);
  }
  auto search = [&](const std::vector<std::int64_t>* cap) {
    std::optional<initialization> best;
    std::int64_t best_total = 0;
    for (std::size_t j = 0; j < orbit.size(); ++j) {
      initialization cand;
      try {
        cand.counts = firing_counts(g, m0, orbit[j]);
        cand.steps = build_execution(g, m0, cand.counts, cap);
      } catch (const infeasible_initialization&) {
        continue;
      }
      cand.target = orbit[j];
      cand.phase = j;
      const std::int64_t total = std::accumulate(cand.counts.begin(), cand.counts.end(), std::int64_t{0});
      if (!best || total < best_total || (total == best_total && cand.steps.size() < best->steps.size())) {
        best_total = total;
        best = std::move(cand);
      }
    }
    return best;
  };
  auto best = capacity ? search(&*capacity) : std::nullopt;
  if (!best) best = search(nullptr);
  if (!best) throw infeasible_initialization("no marking of the steady orbit is reachable from the initial marking");
  return *best;
}

/// 1 when D(p) <= p - k, otherwise 2.
inline std::vector<int> compute_sizes(const std::vector<std::int64_t>& d, const periodicity& kp) {
  std::vector<int> out(d.size());
  for (std::size_t p = 0; p < d.size(); ++p) out[p] = d[p] <= kp.p - kp.k ? 1 : 2;
  return out;
}

struct schedule_options {
  bool close = true;
  bool expand = true;
  bool equalize = true;
  std::size_t cycle_cap = default_cycle_cap;
  std::optional<std::size_t> horizon;
  propagation_options propagation;
};

struct schedule_report {
  marked_graph graph;  // the graph actually scheduled
  provenance_map provenance;
  periodicity kp;
  std::optional<std::int64_t> alpha;  // undefined when k = p
  std::vector<periodic_schedule> schedules;
  marking m_periodic;  // marking at the start of the steady part
  delay_distribution delays;
  std::vector<int> sizes;
  std::size_t initial_length = 0;
  std::size_t phase = 0;
  std::vector<std::int64_t> initial_counts;
};

/// The full pipeline: closure, latency expansion, equalization, then k and p,
/// delays, steady words, the periodic marking, initialization and sizes.
inline schedule_report schedule(const marked_graph& raw, const schedule_options& opt = {}) {
  marked_graph g = raw;
  provenance_map prov = provenance_map::identity(raw);
  if (!is_strongly_connected(g)) {
    if (!opt.close)
      throw not_closed("graph is not strongly connected; close it with feedback places before scheduling");
    auto closed = close_graph(g, opt.cycle_cap);
    prov = prov.then(closed.provenance);
    g = std::move(closed.graph);
  }
  if (opt.expand && !g.is_plain()) {
    auto expanded = expand_latencies(g);
    prov = prov.then(expanded.provenance);
    g = std::move(expanded.graph);
  }
  detail::require_schedulable(g);
  const periodicity kp = compute_k_p(g, opt.cycle_cap);
  if (opt.equalize) {
    auto eq = equalize(g, opt.cycle_cap);
    prov = prov.then(eq.provenance);
    g = std::move(eq.graph);
  }

  schedule_report rep;
  rep.kp = kp;
  if (kp.k_root() < kp.p_root()) rep.alpha = alpha(kp.k_root(), kp.p_root()).value;
  rep.delays = compute_D(g, kp, opt.horizon);
  const auto words = compute_exec_periodic(g, rep.delays, kp, opt.propagation);
  const marking m_per = compute_m_periodic(g, words);
  const auto orbit = steady_orbit(g, m_per, words);
  rep.sizes = compute_sizes(rep.delays.full, kp);
  const auto init = compute_exec_initial(g, g.initial_marking(), orbit, &rep.sizes);

  rep.initial_length = init.steps.size();
  rep.phase = init.phase;
  rep.initial_counts = init.counts;
  rep.m_periodic = init.target;
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    binary_word head;
    for (const auto& ft : init.steps) head.push_back(ft[t]);
    rep.schedules.emplace_back(std::move(head), rotate(words[t], -static_cast<std::int64_t>(init.phase)));
  }
  rep.graph = std::move(g);
  rep.provenance = std::move(prov);
  return rep;
}

/// Replays the report's schedules from the graph's initial marking over the
/// initial part and `periods` steady periods.
inline execution_trace replay_schedule(const schedule_report& rep, std::size_t periods = 3) {
  return replay_schedules(rep.graph, rep.graph.initial_marking(), rep.schedules,
                          rep.initial_length + periods * static_cast<std::size_t>(rep.kp.p));
}

}  // namespace kpsched
