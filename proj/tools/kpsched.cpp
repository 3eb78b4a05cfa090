// Command-line front end for the kpsched library.
//
// Exit codes: 0 success, 1 the graph is rejected (invalid, not live, not
// schedulable), 2 usage or parse error.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "kpsched/kpsched.hpp"

namespace {

using namespace kpsched;
using json = nlohmann::ordered_json;

struct run_config {
  std::string command;
  std::string path;
  std::string format = "text";
  bool expand = false;
  bool equalize = false;
  bool close = false;
  bool raw = false;
  bool verify = false;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> horizon;
  std::size_t cycle_cap = default_cycle_cap;
  std::optional<std::string> seed_transition;
  bool verbose = false;
};

void log(const run_config& cfg, const std::string& msg) {
  if (cfg.verbose) std::cerr << "kpsched: " << msg << "\n";
}

struct staged_graph {
  marked_graph graph;
  provenance_map provenance;
};

// Applies --close, --expand and --equalize in pipeline order.
staged_graph apply_flags(const run_config& cfg, const marked_graph& input) {
  staged_graph s{input, provenance_map::identity(input)};
  if (cfg.close) {
    auto r = close_graph(s.graph, cfg.cycle_cap);
    s.provenance = s.provenance.then(r.provenance);
    s.graph = std::move(r.graph);
    log(cfg, "closed: " + std::to_string(s.graph.place_count()) + " places");
  }
  if (cfg.expand || cfg.equalize) {
    auto r = expand_latencies(s.graph);
    s.provenance = s.provenance.then(r.provenance);
    s.graph = std::move(r.graph);
    log(cfg, "expanded: " + std::to_string(s.graph.transition_count()) + " transitions, " +
                 std::to_string(s.graph.place_count()) + " places");
  }
  if (cfg.equalize) {
    auto r = equalize(s.graph, cfg.cycle_cap);
    s.provenance = s.provenance.then(r.provenance);
    s.graph = std::move(r.graph);
    log(cfg, "equalized: " + std::to_string(s.graph.place_count()) + " places");
  }
  return s;
}

std::string cycle_str(const marked_graph& g, const cycle& c) {
  std::string s;
  for (const place_index p : c.places) s += (s.empty() ? "" : " ") + g.place_at(p).id;
  return s;
}

int cmd_validate(const run_config& cfg, const marked_graph& g) {
  const auto rep = validate(g);
  if (cfg.format == "json") {
    json doc;
    doc["valid"] = rep.valid();
    doc["violations"] = rep.violations;
    doc["dead_cycles"] = json::array();
    for (const auto& c : rep.dead_cycles) doc["dead_cycles"].push_back(cycle_str(g, c));
    doc["connectivity"] = to_string(rep.shape);
    doc["closed"] = rep.closed();
    json sources = json::array(), sinks = json::array();
    for (const auto t : rep.sources) sources.push_back(g.transition_at(t).id);
    for (const auto t : rep.sinks) sinks.push_back(g.transition_at(t).id);
    doc["sources"] = sources;
    doc["sinks"] = sinks;
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& v : rep.violations) std::cout << "violation: " << v << "\n";
    for (const auto& c : rep.dead_cycles) std::cout << "dead cycle: " << cycle_str(g, c) << "\n";
    if (rep.dead_cycles_truncated) std::cout << "dead cycle list truncated\n";
    std::cout << "connectivity: " << to_string(rep.shape) << "\n";
    std::cout << (rep.closed() ? "closed" : "open") << "\n";
    for (const auto t : rep.sources) std::cout << "source: " << g.transition_at(t).id << "\n";
    for (const auto t : rep.sinks) std::cout << "sink: " << g.transition_at(t).id << "\n";
    std::cout << (rep.valid() ? "valid and live" : "not valid") << "\n";
  }
  return rep.valid() ? 0 : 1;
}

int cmd_analyze(const run_config& cfg, const marked_graph& input) {
  const auto s = apply_flags(cfg, input);
  const marked_graph& g = s.graph;
  const auto scc = scc_decomposition(g);
  json doc;
  doc["connectivity"] = to_string(classify(g));
  doc["components"] = json::array();
  for (const auto& c : scc.components) {
    json e;
    e["transitions"] = json::array();
    for (const auto t : c.transitions) e["transitions"].push_back(g.transition_at(t).id);
    const auto cycles = elementary_cycles(c.graph, cfg.cycle_cap);
    e["throughput"] = cycles.empty() ? json(nullptr) : json(throughput_of(cycles).value.str());
    doc["components"].push_back(e);
  }
  if (is_strongly_connected(g)) {
    if (!is_live(g)) throw not_live("graph is not live");
    const auto cycles = elementary_cycles(g, cfg.cycle_cap);
    const auto tp = throughput_of(cycles);
    std::int64_t k = 0, p = 0;
    for (const auto& c : tp.critical) {
      k = std::gcd(k, c.tokens);
      p = std::gcd(p, c.length);
    }
    doc["throughput"] = tp.value.str();
    doc["k"] = k;
    doc["p"] = p;
    doc["cycles"] = cycles.size();
    doc["critical"] = json::array();
    for (const auto& c : tp.critical) doc["critical"].push_back(cycle_str(g, c));
    if (g.is_plain()) doc["equalized"] = is_equalized(g, cfg.cycle_cap);
  }
  if (cfg.format == "json") {
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  std::cout << "connectivity: " << doc["connectivity"].get<std::string>() << "\n";
  std::cout << "components: " << scc.components.size() << "\n";
  for (const auto& c : doc["components"]) {
    std::cout << "  {";
    bool first = true;
    for (const auto& t : c["transitions"]) {
      std::cout << (first ? "" : ",") << t.get<std::string>();
      first = false;
    }
    std::cout << "} throughput " << (c["throughput"].is_null() ? "none" : c["throughput"].get<std::string>()) << "\n";
  }
  if (doc.contains("throughput")) {
    std::cout << "throughput " << doc["throughput"].get<std::string>() << ", k=" << doc["k"] << ", p=" << doc["p"]
              << "\n";
    for (const auto& c : doc["critical"]) std::cout << "critical: " << c.get<std::string>() << "\n";
    if (doc.contains("equalized"))
      std::cout << (doc["equalized"].get<bool>() ? "already equalized" : "not equalized") << "\n";
  }
  return 0;
}

int cmd_transform(const run_config& cfg, const marked_graph& input) {
  run_config c = cfg;
  if (cfg.command == "expand") c.expand = true;
  if (cfg.command == "equalize") c.equalize = true;
  if (cfg.command == "close") c.close = true;
  const auto s = apply_flags(c, input);
  if (cfg.command == "equalize") {
    const bool unchanged = std::none_of(s.provenance.entries().begin(), s.provenance.entries().end(),
                                        [](const auto& e) { return e.second.kind == origin_kind::equalization; });
    if (unchanged) std::cerr << "kpsched: already equalized\n";
  }
  if (cfg.format == "dot") {
    std::cout << to_dot(s.graph, &s.provenance);
  } else if (cfg.format == "json") {
    json doc;
    doc["graph"] = graph_to_json(s.graph);
    doc["provenance"] = provenance_to_json(s.provenance);
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << serialize_graph(s.graph);
  }
  return 0;
}

// Replays the report and checks it against the ASAP oracle.
std::vector<std::string> verify_report(const schedule_report& rep) {
  std::vector<std::string> failures;
  const auto p = static_cast<std::size_t>(rep.kp.p);
  const auto trace = replay_schedule(rep, 3);
  if (trace.markings[rep.initial_length] != rep.m_periodic) failures.push_back("initialization misses M_periodic");
  if (trace.markings[rep.initial_length + p] != rep.m_periodic) failures.push_back("M_periodic does not recur after p steps");
  execution_trace asap;
  asap.markings.push_back(rep.m_periodic);
  for (std::size_t i = 0; i < 3 * p; ++i) {
    auto [ft, m] = step_asap(rep.graph, asap.last());
    asap.append(std::move(ft), std::move(m));
  }
  for (std::size_t i = 0; i < 3 * p; ++i)
    if (asap.steps[i] != trace.steps[rep.initial_length + i]) {
      failures.push_back("steady step " + std::to_string(i + 1) + " differs from ASAP");
      break;
    }
  const auto occ = max_occupancy(trace);
  for (place_index q = 0; q < rep.graph.place_count(); ++q)
    if (occ[q] != rep.sizes[q])
      failures.push_back("place " + rep.graph.place_at(q).id + " holds " + std::to_string(occ[q]) + " tokens, size " +
                         std::to_string(rep.sizes[q]));
  return failures;
}

int cmd_schedule(const run_config& cfg, const marked_graph& input) {
  schedule_options opt;
  opt.cycle_cap = cfg.cycle_cap;
  opt.horizon = cfg.horizon;
  opt.propagation.seed_transition = cfg.seed_transition;
  marked_graph g = input;
  if (cfg.raw) {
    opt.close = opt.expand = opt.equalize = false;
    if (cfg.close || cfg.expand || cfg.equalize) {
      auto s = apply_flags(cfg, input);
      g = std::move(s.graph);
      opt.close = false;
    }
  }
  log(cfg, "scheduling " + std::to_string(g.transition_count()) + " transitions");
  const auto rep = schedule(g, opt);
  if (cfg.format == "json") {
    std::cout << report_to_json(rep).dump(2) << "\n";
  } else if (cfg.format == "dot") {
    std::cout << report_to_dot(rep);
  } else {
    std::cout << format_report(rep);
  }
  if (!cfg.verify) return 0;
  const auto failures = verify_report(rep);
  auto& out = cfg.format == "text" ? std::cout : std::cerr;
  for (const auto& f : failures) out << "verify: " << f << "\n";
  out << (failures.empty() ? "verify: ok" : "verify: FAILED") << "\n";
  return failures.empty() ? 0 : 1;
}

int cmd_simulate(const run_config& cfg, const marked_graph& input) {
  run_config c = cfg;
  if (!input.is_plain()) c.expand = true;
  const auto s = apply_flags(c, input);
  const auto run = run_asap(s.graph, s.graph.initial_marking(), cfg.horizon);
  execution_trace trace = run.trace;
  if (cfg.steps) {
    while (trace.length() < *cfg.steps) {
      auto [ft, m] = step_asap(s.graph, trace.last());
      trace.append(std::move(ft), std::move(m));
    }
    trace.steps.resize(*cfg.steps);
    trace.markings.resize(*cfg.steps + 1);
  }
  const auto& cert = run.certificate;
  if (cfg.format == "json") {
    json doc;
    doc["certificate"] = {{"j0", cert.j0}, {"k", cert.k}, {"p", cert.p}};
    doc["steps"] = json::array();
    for (std::size_t i = 1; i <= trace.length(); ++i) {
      json step;
      step["fired"] = json::array();
      for (transition_index t = 0; t < s.graph.transition_count(); ++t)
        if (trace.steps[i - 1][t]) step["fired"].push_back(s.graph.transition_at(t).id);
      step["marking"] = json::object();
      for (place_index p = 0; p < s.graph.place_count(); ++p) step["marking"][s.graph.place_at(p).id] = trace.markings[i][p];
      doc["steps"].push_back(step);
    }
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << format_trace(s.graph, trace);
    std::cout << "periodic: j0=" << cert.j0 << " k=" << cert.k << " p=" << cert.p << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static scheduling of marked graphs: balanced k-periodic ASAP executions"};
  app.require_subcommand(1);
  run_config cfg;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "Check structure and liveness"},
      {"analyze", "Throughput, k, p, critical cycles and components"},
      {"expand", "Expand latencies into plain places and transitions"},
      {"equalize", "Expand latencies then equalize"},
      {"close", "Add feedback places to a simply connected graph"},
      {"schedule", "Compute the balanced ASAP execution"},
      {"simulate", "Run the ASAP token game and detect its period"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("graph", cfg.path, "Graph file (JSON)")->required();
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json", "dot"}));
    sub->add_flag("--expand", cfg.expand, "Expand latencies first");
    sub->add_flag("--equalize", cfg.equalize, "Expand and equalize first");
    sub->add_flag("--close", cfg.close, "Close a simply connected graph first");
    sub->add_option("--cycle-cap", cfg.cycle_cap, "Maximum number of elementary cycles enumerated");
    sub->add_option("--horizon", cfg.horizon, "Maximum number of ASAP steps when looking for a period");
    sub->add_flag("-v,--verbose", cfg.verbose, "Report pipeline stages on stderr");
    if (name == "schedule") {
      sub->add_flag("--raw", cfg.raw, "Skip the automatic closure, expansion and equalization");
      sub->add_flag("--verify", cfg.verify, "Replay the schedule against the ASAP simulation");
      sub->add_option("--seed-transition", cfg.seed_transition, "Transition receiving the seed word");
    }
    if (name == "simulate") sub->add_option("--steps", cfg.steps, "Number of steps to print");
    sub->callback([&cfg, name = name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  marked_graph g;
  try {
    g = load_graph(cfg.path);
  } catch (const error& e) {
    std::cerr << "kpsched: " << cfg.path << ": " << e.what() << "\n";
    return 2;
  }

  try {
    if (cfg.command == "validate") return cmd_validate(cfg, g);
    if (cfg.command == "analyze") return cmd_analyze(cfg, g);
    if (cfg.command == "schedule") return cmd_schedule(cfg, g);
    if (cfg.command == "simulate") return cmd_simulate(cfg, g);
    return cmd_transform(cfg, g);
  } catch (const not_closed& e) {
    std::cerr << "kpsched: " << e.what() << " (pass --close, or drop --raw)\n";
    return 1;
  } catch (const error& e) {
    std::cerr << "kpsched: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kpsched: " << e.what() << "\n";
    return 1;
  }
}
