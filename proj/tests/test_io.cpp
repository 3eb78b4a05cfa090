#include <gtest/gtest.h>

#include <random>

#include "dot_checker.hpp"
#include "fixtures.hpp"

using namespace kpsched;

TEST(GraphJson, RoundTrip) {
  for (const auto& g : {fixtures::running_example(), fixtures::already_equalized(), fixtures::aes()})
    EXPECT_EQ(parse_graph(serialize_graph(g)), g);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const auto g = fixtures::random_graph(rng);
    EXPECT_EQ(parse_graph(serialize_graph(g)), g);
  }
}

TEST(GraphJson, Defaults) {
  const auto g = parse_graph(R"({"transitions":[{"id":"a","latency":2}],"places":[{"id":"p","from":"a","to":"a","tokens":1}]})");
  EXPECT_EQ(g.transition_at(0).latency, 2);
  EXPECT_EQ(g.place_at(0).latency, 1);
  EXPECT_EQ(g.place_at(0).tokens, 1);
}

TEST(GraphJson, Errors) {
  EXPECT_THROW(parse_graph(R"({"transitions":[],"places":[],"extra":1})"), parse_error);
  EXPECT_THROW(parse_graph(R"({"transitions":[{"id":"a","colour":"red"}],"places":[]})"), parse_error);
  EXPECT_THROW(parse_graph(R"({"transitions":[{"id":"a"}],"places":[{"id":"p","from":"a","to":"a"}]})"), parse_error);
  EXPECT_THROW(parse_graph(R"({"transitions":[{"id":7}],"places":[]})"), parse_error);
  EXPECT_THROW(parse_graph(R"({"transitions":[{"id":"a"}],"places":[{"id":"p","from":"a","to":"b","tokens":0}]})"),
               structural_error);
  EXPECT_THROW(parse_graph(R"({"transitions":[{"id":"a"},{"id":"a"}],"places":[]})"), structural_error);
  try {
    parse_graph("{\n  \"transitions\": [\n    {\"id\": \"a\"},\n  ]\n}");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line, 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(GraphJson, LoadSamples) {
  EXPECT_EQ(load_graph(std::string(KPSCHED_SAMPLES) + "/running_example.json"), fixtures::running_example());
  EXPECT_EQ(load_graph(std::string(KPSCHED_SAMPLES) + "/aes.json"), fixtures::aes());
  EXPECT_EQ(load_graph(std::string(KPSCHED_SAMPLES) + "/already_equalized.json"), fixtures::already_equalized());
  EXPECT_THROW(load_graph(std::string(KPSCHED_SAMPLES) + "/malformed.json"), parse_error);
  EXPECT_THROW(load_graph("/nonexistent/graph.json"), parse_error);
}

TEST(Report, JsonKeyedByOriginalIds) {
  const auto rep = schedule(fixtures::running_example());
  const auto doc = report_to_json(rep);
  EXPECT_EQ(doc["k"], 4);
  EXPECT_EQ(doc["p"], 7);
  EXPECT_EQ(doc["alpha"], 5);
  for (const char* t : {"A", "B", "T", "C"}) EXPECT_TRUE(doc["transitions"].contains(t)) << t;
  for (const char* p : {"s", "l", "r1", "r2", "r3"}) EXPECT_TRUE(doc["places"].contains(p)) << p;
  EXPECT_EQ(doc["transitions"].size(), 4u);
  EXPECT_TRUE(doc["synthetic"]["places"].contains("l~e1"));
  EXPECT_EQ(doc["synthetic"]["places"]["l~e1"]["D"], 2);
  EXPECT_EQ(doc["synthetic"]["places"]["l~e1"]["origin"], "l");
  const auto text = format_report(rep);
  EXPECT_NE(text.find("k=4 p=7 alpha=5"), std::string::npos);
  EXPECT_NE(text.find("synthetic:"), std::string::npos);
}

TEST(Dot, CheckerAcceptsAndRejects) {
  EXPECT_NO_THROW(dot::check("digraph g { a -> b [label=\"x\"]; b; }"));
  EXPECT_NO_THROW(dot::check("graph { a -- b -- c }"));
  EXPECT_THROW(dot::check("digraph g { a -> }"), std::runtime_error);
  EXPECT_THROW(dot::check("digraph g { a -- b }"), std::runtime_error);
  EXPECT_THROW(dot::check("digraph g { a -> b "), std::runtime_error);
  EXPECT_THROW(dot::check("digraph g { \"a -> b }"), std::runtime_error);
}

TEST(Dot, RenderingsAreValid) {
  dot::check(to_dot(fixtures::running_example()));
  const auto e = expand_latencies(fixtures::running_example());
  const auto text = to_dot(e.graph, &e.provenance);
  dot::check(text);
  EXPECT_NE(text.find("style=dashed"), std::string::npos);
  const auto rep = schedule(fixtures::aes());
  const auto rendered = report_to_dot(rep);
  dot::check(rendered);
  EXPECT_NE(rendered.find(")*"), std::string::npos);

  marked_graph odd;
  odd.add_transition("we\"ird");
  odd.add_place("p\\q", "we\"ird", "we\"ird", 1);
  dot::check(to_dot(odd));
}
