#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/words.hpp"

namespace kpsched {

struct marking_hash {
  std::size_t operator()(const marking& m) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const auto v : m) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// Transitions whose input places all hold a token. Sources are always firable.
inline firing_set firable(const marked_graph& g, const marking& m) {
  firing_set out(g.transition_count(), false);
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    bool ok = true;
    for (const place_index p : g.inputs(t))
      if (m[p] <= 0) {
        ok = false;
        break;
      }
    out[t] = ok;
  }
  return out;
}

/// One synchronous step firing exactly `ft`: M'(p) = M(p) + FT(producer) - FT(consumer).
inline marking step_guided(const marked_graph& g, const marking& m, const firing_set& ft) {
  if (ft.size() != g.transition_count()) throw illegal_firing("firing set size does not match the graph");
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    if (!ft[t]) continue;
    for (const place_index p : g.inputs(t))
      if (m[p] <= 0) throw illegal_firing("transition '" + g.transition_at(t).id + "' is not firable");
  }
  marking next = m;
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& pl = g.place_at(p);
    next[p] += (ft[pl.from] ? 1 : 0) - (ft[pl.to] ? 1 : 0);
  }
  return next;
}

inline std::pair<firing_set, marking> step_asap(const marked_graph& g, const marking& m) {
  firing_set ft = firable(g, m);
  marking next = step_guided(g, m, ft);
  return {std::move(ft), std::move(next)};
}

/// markings[0] is the start marking; steps[i-1] is the set fired at step i and
/// markings[i] the marking it produces.
struct execution_trace {
  std::vector<marking> markings;
  std::vector<firing_set> steps;

  std::size_t length() const { return steps.size(); }
  const marking& start() const { return markings.front(); }
  const marking& last() const { return markings.back(); }

  void append(firing_set ft, marking m) {
    steps.push_back(std::move(ft));
    markings.push_back(std::move(m));
  }
};

/// M_{j0} == M_{j0+p}; each transition fires k times in steps j0+1..j0+p.
struct periodicity_certificate {
  std::size_t j0 = 0;
  std::size_t k = 0;
  std::size_t p = 0;
};

struct asap_run {
  execution_trace trace;
  periodicity_certificate certificate;
};

inline std::size_t default_horizon(const marked_graph& g) {
  const auto places = static_cast<std::size_t>(g.place_count());
  const auto tokens = static_cast<std::size_t>(g.total_tokens());
  const std::size_t guess = std::max<std::size_t>(places, 1) * (tokens + 1) * std::max<std::size_t>(places, 1);
  return std::clamp<std::size_t>(guess, 1000, 1000000);
}

/// ASAP token game from m0 until the first repeated marking.
inline asap_run run_asap(const marked_graph& g, const marking& m0, std::optional<std::size_t> horizon = std::nullopt) {
  if (!g.is_plain()) throw not_plain("ASAP simulation needs a plain graph; expand latencies first");
  for (transition_index t = 0; t < g.transition_count(); ++t)
    if (g.is_source(t) || g.is_sink(t))
      throw not_closed("transition '" + g.transition_at(t).id + "' is a source or sink; close the graph first");
  const std::size_t limit = horizon.value_or(default_horizon(g));

  asap_run run;
  run.trace.markings.push_back(m0);
  std::unordered_map<marking, std::size_t, marking_hash> seen;
  seen.emplace(m0, 0);
  for (std::size_t i = 1; i <= limit; ++i) {
    auto [ft, next] = step_asap(g, run.trace.last());
    run.trace.append(std::move(ft), next);
    const auto [it, fresh] = seen.emplace(std::move(next), i);
    if (fresh) continue;
    const std::size_t j0 = it->second;
    const std::size_t p = i - j0;
    std::vector<std::size_t> fired(g.transition_count(), 0);
    for (std::size_t s = j0; s < i; ++s)
      for (transition_index t = 0; t < g.transition_count(); ++t) fired[t] += run.trace.steps[s][t] ? 1 : 0;
    const std::size_t k = fired.empty() ? 0 : fired.front();
    for (const auto f : fired)
      if (f != k) throw internal_error("transitions disagree on their firing count over one ASAP period");
    run.certificate = {j0, k, p};
    return run;
  }
  throw horizon_exceeded("no recurring marking within " + std::to_string(limit) + " ASAP steps");
}

/// Delay(p, i) = M_{i-1}(p) - FT_i(consumer of p), for 1 <= i <= trace length.
inline std::int64_t delay(const marked_graph& g, const execution_trace& trace, place_index p, std::size_t i) {
  return trace.markings.at(i - 1)[p] - (trace.steps.at(i - 1)[g.place_at(p).to] ? 1 : 0);
}

/// Per-step delay ledger: ledger[i-1][p] = Delay(p, i).
inline std::vector<std::vector<std::int64_t>> delay_ledger(const marked_graph& g, const execution_trace& trace) {
  std::vector<std::vector<std::int64_t>> out(trace.length(), std::vector<std::int64_t>(g.place_count()));
  for (std::size_t i = 1; i <= trace.length(); ++i)
    for (place_index p = 0; p < g.place_count(); ++p) out[i - 1][p] = delay(g, trace, p, i);
  return out;
}

/// Delays summed over steps j0+1 .. j0+p.
inline std::vector<std::int64_t> measure_delays(const marked_graph& g, const execution_trace& trace,
                                                const periodicity_certificate& cert) {
  if (cert.j0 + cert.p > trace.length()) throw std::out_of_range("certificate window exceeds the trace");
  std::vector<std::int64_t> d(g.place_count(), 0);
  for (std::size_t i = cert.j0 + 1; i <= cert.j0 + cert.p; ++i)
    for (place_index p = 0; p < g.place_count(); ++p) d[p] += delay(g, trace, p, i);
  return d;
}

inline std::vector<std::int64_t> max_occupancy(const execution_trace& trace) {
  std::vector<std::int64_t> out(trace.markings.empty() ? 0 : trace.start().size(), 0);
  for (const auto& m : trace.markings)
    for (std::size_t p = 0; p < m.size(); ++p) out[p] = std::max(out[p], m[p]);
  return out;
}

/// Guided execution of explicit firing sets; the first illegal firing raises schedule_invalid.
inline execution_trace run_guided(const marked_graph& g, const marking& m0, const std::vector<firing_set>& steps) {
  execution_trace trace;
  trace.markings.push_back(m0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const firing_set& ft = steps[i];
    const firing_set ok = firable(g, trace.last());
    for (transition_index t = 0; t < g.transition_count(); ++t)
      if (ft[t] && !ok[t]) throw schedule_invalid(i + 1, g.transition_at(t).id);
    trace.append(ft, step_guided(g, trace.last(), ft));
  }
  return trace;
}

/// Drives every transition by the letters of its schedule for `steps` instants.
inline execution_trace replay_schedules(const marked_graph& g, const marking& m0,
                                        const std::vector<periodic_schedule>& schedules, std::size_t steps) {
  if (schedules.size() != g.transition_count()) throw std::invalid_argument("one schedule per transition is required");
  std::vector<firing_set> sets(steps, firing_set(g.transition_count(), false));
  for (std::size_t i = 0; i < steps; ++i)
    for (transition_index t = 0; t < g.transition_count(); ++t) sets[i][t] = schedules[t](i + 1);
  return run_guided(g, m0, sets);
}

/// Activity word of each transition over the trace.
inline std::vector<binary_word> activity_words(const execution_trace& trace, std::size_t transitions) {
  std::vector<binary_word> out(transitions);
  for (const auto& ft : trace.steps)
    for (std::size_t t = 0; t < transitions; ++t) out[t].push_back(ft[t]);
  return out;
}

/// One line per step: `step i: fired={a,b} marking={p:1,q:0}`.
inline std::string format_trace(const marked_graph& g, const execution_trace& trace) {
  std::ostringstream os;
  auto write_marking = [&](const marking& m) {
    os << "marking={";
    for (place_index p = 0; p < m.size(); ++p) os << (p ? "," : "") << g.place_at(p).id << ":" << m[p];
    os << "}";
  };
  os << "step 0: fired={} ";
  write_marking(trace.start());
  os << "\n";
  for (std::size_t i = 1; i <= trace.length(); ++i) {
    os << "step " << i << ": fired={";
    bool first = true;
    for (transition_index t = 0; t < g.transition_count(); ++t)
      if (trace.steps[i - 1][t]) {
        os << (first ? "" : ",") << g.transition_at(t).id;
        first = false;
      }
    os << "} ";
    write_marking(trace.markings[i]);
    os << "\n";
  }
  return os.str();
}

/// One `id: word` line per transition.
inline std::string format_activity(const marked_graph& g, const execution_trace& trace) {
  std::ostringstream os;
  const auto words = activity_words(trace, g.transition_count());
  for (transition_index t = 0; t < g.transition_count(); ++t) os << g.transition_at(t).id << ": " << words[t] << "\n";
  return os.str();
}

}  // namespace kpsched
