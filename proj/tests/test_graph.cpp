#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace kpsched;

TEST(Rational, NormalizesAndCompares) {
  EXPECT_EQ(rational(4, 8), rational(1, 2));
  EXPECT_EQ(rational(3, -6).num(), -1);
  EXPECT_EQ(rational(3, -6).den(), 2);
  EXPECT_LT(rational(4, 7), rational(2, 3));
  EXPECT_EQ(rational(6, 21).str(), "2/7");
  EXPECT_THROW(rational(1, 0), std::domain_error);
}

TEST(MarkedGraph, RejectsStructuralErrors) {
  marked_graph g;
  g.add_transition("a");
  EXPECT_THROW(g.add_transition("a"), structural_error);
  EXPECT_THROW(g.add_transition(""), structural_error);
  EXPECT_THROW(g.add_transition("b", -1), structural_error);
  EXPECT_THROW(g.add_place("a", "a", "a"), structural_error);  // ids share one namespace
  EXPECT_THROW(g.add_place("p", "a", "nope"), structural_error);
  EXPECT_THROW(g.add_place("p", "a", "a", -1), structural_error);
  EXPECT_THROW(g.add_place("p", "a", "a", 0, 0), structural_error);
  EXPECT_NO_THROW(g.add_place("p", "a", "a", 1));
  EXPECT_EQ(g.inputs(0).size(), 1u);
  EXPECT_EQ(g.outputs(0).size(), 1u);
}

TEST(MarkedGraph, PlainAndMarking) {
  auto g = fixtures::running_example();
  EXPECT_FALSE(g.is_plain());
  EXPECT_EQ(g.total_tokens(), 5);
  EXPECT_TRUE(fixtures::ring(3, 1).is_plain());
  g.set_marking(marking{0, 1, 0, 1, 0});
  EXPECT_EQ(g.total_tokens(), 2);
  EXPECT_THROW(g.set_marking(marking{0}), structural_error);
}

TEST(Validate, RunningExampleIsValidLiveClosed) {
  const auto r = validate(fixtures::running_example());
  EXPECT_TRUE(r.valid());
  EXPECT_TRUE(r.closed());
  EXPECT_EQ(r.shape, connectivity::strongly_connected);
}

TEST(Validate, DeadSelfLoop) {
  marked_graph g;
  g.add_transition("t");
  g.add_place("p", "t", "t", 0);
  const auto r = validate(g);
  EXPECT_FALSE(r.live());
  ASSERT_EQ(r.dead_cycles.size(), 1u);
  EXPECT_EQ(r.dead_cycles[0].length, 1);
}

TEST(Validate, TwoSccsAreSimplyConnected) {
  const auto r = validate(fixtures::two_rings());
  EXPECT_EQ(r.shape, connectivity::simply_connected);
  EXPECT_TRUE(r.sources.empty());
  EXPECT_TRUE(r.sinks.empty());
}

TEST(Validate, EmptyGraphIsAViolation) {
  EXPECT_FALSE(validate(marked_graph{}).structurally_valid());
}

TEST(Validate, DisconnectedAndOpen) {
  marked_graph g;
  g.add_transition("a");
  g.add_transition("b");
  g.add_transition("c");
  g.add_place("p", "a", "b", 0);
  const auto r = validate(g);
  EXPECT_EQ(r.shape, connectivity::disconnected);
  EXPECT_EQ(r.sources.size(), 2u);  // a and c
  EXPECT_EQ(r.sinks.size(), 2u);    // b and c
}

TEST(Cycles, RunningExampleAfterExpansion) {
  const auto g = expand_latencies(fixtures::running_example()).graph;
  const auto cycles = elementary_cycles(g);
  ASSERT_EQ(cycles.size(), 2u);
  std::multiset<std::pair<std::int64_t, std::int64_t>> ml;
  for (const auto& c : cycles) ml.insert({c.tokens, c.length});
  EXPECT_EQ(ml, (std::multiset<std::pair<std::int64_t, std::int64_t>>{{2, 2}, {4, 7}}));
}

TEST(Cycles, LatencyWeightedLengthsOnUnexpandedGraph) {
  const auto cycles = elementary_cycles(fixtures::running_example());
  ASSERT_EQ(cycles.size(), 2u);
  EXPECT_EQ(throughput_of(cycles).value, rational(4, 7));
}

TEST(Cycles, SelfLoop) {
  marked_graph g;
  g.add_transition("t");
  g.add_place("p", "t", "t", 1);
  const auto cycles = elementary_cycles(g);
  ASSERT_EQ(cycles.size(), 1u);
  EXPECT_EQ(cycles[0].length, 1);
}

TEST(Cycles, MatchBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 150; ++i) {
    const auto g = fixtures::random_graph(rng, 8, 13);
    std::set<std::vector<place_index>> got;
    const auto cycles = elementary_cycles(g);
    for (const auto& c : cycles) {
      EXPECT_EQ(c.places.front(), *std::min_element(c.places.begin(), c.places.end()));
      got.insert(c.places);
      std::int64_t m = 0;
      for (std::size_t j = 0; j < c.places.size(); ++j) {
        m += g.place_at(c.places[j]).tokens;
        EXPECT_EQ(g.place_at(c.places[j]).to, g.place_at(c.places[(j + 1) % c.places.size()]).from);
      }
      EXPECT_EQ(c.tokens, m);
    }
    EXPECT_EQ(got.size(), cycles.size()) << "duplicate cycle";
    EXPECT_EQ(got, oracle::cycles(g));
  }
}

TEST(Cycles, DeterministicOrder) {
  const auto g = fixtures::already_equalized();
  const auto a = elementary_cycles(g);
  const auto b = elementary_cycles(g);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].places, b[i].places);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1].places, a[i].places);
}

TEST(Cycles, InvariantUnderRelabeling) {
  // same structure with transitions and places inserted in reverse order
  const auto g = fixtures::already_equalized();
  marked_graph h;
  for (std::size_t t = g.transition_count(); t-- > 0;) h.add_transition("x" + g.transition_at(t).id);
  for (std::size_t p = g.place_count(); p-- > 0;) {
    const auto& pl = g.place_at(p);
    h.add_place("x" + pl.id, "x" + g.transition_at(pl.from).id, "x" + g.transition_at(pl.to).id, pl.tokens);
  }
  auto summary = [](const marked_graph& x) {
    std::multiset<std::pair<std::int64_t, std::int64_t>> s;
    for (const auto& c : elementary_cycles(x)) s.insert({c.tokens, c.length});
    return s;
  };
  EXPECT_EQ(summary(g), summary(h));
}

TEST(Cycles, CapIsEnforced) {
  // complete digraph on 6 transitions has far more than 10 cycles
  marked_graph g;
  for (int i = 0; i < 6; ++i) g.add_transition("t" + std::to_string(i));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) g.add_place("p" + std::to_string(i) + std::to_string(j), std::size_t(i), std::size_t(j), 1);
  EXPECT_THROW(elementary_cycles(g, 10), cycle_limit_exceeded);
  try {
    elementary_cycles(g, 10);
  } catch (const cycle_limit_exceeded& e) {
    EXPECT_EQ(e.cap, 10u);
  }
}

TEST(Throughput, Fixtures) {
  const auto tp = throughput(expand_latencies(fixtures::running_example()).graph);
  EXPECT_EQ(tp.value, rational(4, 7));
  ASSERT_EQ(tp.critical.size(), 1u);
  EXPECT_EQ(tp.critical[0].length, 7);

  const auto fig7 = throughput(fixtures::already_equalized());
  EXPECT_EQ(fig7.value, rational(2, 9));
  ASSERT_EQ(fig7.critical.size(), 1u);
  EXPECT_EQ(fig7.critical[0].length, 9);

  EXPECT_EQ(throughput(fixtures::ring(5, 5)).value, rational(1));
}

TEST(Throughput, Errors) {
  EXPECT_THROW(throughput(fixtures::two_rings()), not_strongly_connected);
  marked_graph g;
  g.add_transition("t");
  g.add_place("p", "t", "t", 0);
  EXPECT_THROW(throughput(g), not_live);
}

TEST(Throughput, MinimumWithExactCriticalSet) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto g = fixtures::random_graph(rng);
    const auto cycles = elementary_cycles(g);
    const auto tp = throughput_of(cycles);
    std::size_t critical = 0;
    for (const auto& c : cycles) {
      EXPECT_LE(tp.value, c.throughput());
      critical += c.throughput() == tp.value;
    }
    EXPECT_EQ(critical, tp.critical.size());
  }
}

TEST(Scc, StronglyConnectedIsOneComponent) {
  const auto r = scc_decomposition(fixtures::running_example());
  ASSERT_EQ(r.components.size(), 1u);
  EXPECT_EQ(r.components[0].transitions.size(), 4u);
  EXPECT_TRUE(r.dac_places.empty());
}

TEST(Scc, TwoRings) {
  const auto g = fixtures::two_rings();
  const auto r = scc_decomposition(g);
  ASSERT_EQ(r.components.size(), 2u);
  ASSERT_EQ(r.dac_places.size(), 1u);
  EXPECT_EQ(g.place_at(r.dac_places[0]).id, "link");
  EXPECT_EQ(r.components[0].graph.place_count(), 2u);
}

TEST(Scc, MatchesReachabilityOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    // random graphs without the guaranteed ring
    marked_graph g;
    const int n = 2 + static_cast<int>(rng() % 8);
    for (int t = 0; t < n; ++t) g.add_transition("t" + std::to_string(t));
    const int m = static_cast<int>(rng() % 14);
    for (int p = 0; p < m; ++p)
      g.add_place("p" + std::to_string(p), rng() % std::size_t(n), rng() % std::size_t(n), 1);
    const auto reach = oracle::reachability(g);
    const auto r = scc_decomposition(g);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        EXPECT_EQ(r.component_of[a] == r.component_of[b], reach[a][b] && reach[b][a]);
    std::size_t places = r.dac_places.size();
    for (const auto& c : r.components) places += c.places.size();
    EXPECT_EQ(places, g.place_count());
  }
}

TEST(Liveness, TokenConservationOnCycles) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto g = fixtures::random_graph(rng);
    const auto cycles = elementary_cycles(g);
    marking m = g.initial_marking();
    for (int step = 0; step < 30; ++step) {
      m = step_asap(g, m).second;
      for (const auto& c : cycles) {
        std::int64_t sum = 0;
        for (const auto p : c.places) sum += m[p];
        EXPECT_EQ(sum, c.tokens);
      }
    }
  }
}
