#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpsched/analysis.hpp"
#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/scheduler.hpp"
#include "kpsched/transform.hpp"

namespace kpsched {

/// Malformed graph document. `line` is 0 when the position is unknown.
struct parse_error : error {
  parse_error(const std::string& what, std::size_t line = 0)
      : error(line ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  std::size_t line;
};

namespace detail {

using json = nlohmann::ordered_json;

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline void check_fields(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw parse_error(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw parse_error(where + " has unknown field '" + key + "'");
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(where + " is missing '" + key + "'");
  if (!it->is_string()) throw parse_error(where + " field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline std::int64_t get_int(const json& obj, const std::string& key, const std::string& where,
                            std::optional<std::int64_t> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw parse_error(where + " is missing '" + key + "'");
  }
  if (!it->is_number_integer()) throw parse_error(where + " field '" + key + "' must be an integer");
  return it->get<std::int64_t>();
}

}  // namespace detail

/// Graph document:
///   {"transitions": [{"id", "latency"?}], "places": [{"id", "from", "to", "tokens", "latency"?}]}
inline marked_graph parse_graph(const std::string& text) {
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(e.what(), detail::line_of(text, e.byte));
  }
  detail::check_fields(doc, {"transitions", "places"}, "document");
  if (!doc.contains("transitions") || !doc["transitions"].is_array())
    throw parse_error("document needs a 'transitions' array");
  if (!doc.contains("places") || !doc["places"].is_array()) throw parse_error("document needs a 'places' array");

  marked_graph g;
  std::size_t i = 0;
  for (const auto& t : doc["transitions"]) {
    const std::string where = "transitions[" + std::to_string(i++) + "]";
    detail::check_fields(t, {"id", "latency"}, where);
    g.add_transition(detail::get_string(t, "id", where), detail::get_int(t, "latency", where, 0));
  }
  i = 0;
  for (const auto& p : doc["places"]) {
    const std::string where = "places[" + std::to_string(i++) + "]";
    detail::check_fields(p, {"id", "from", "to", "tokens", "latency"}, where);
    g.add_place(detail::get_string(p, "id", where), std::string_view(detail::get_string(p, "from", where)),
                std::string_view(detail::get_string(p, "to", where)), detail::get_int(p, "tokens", where),
                detail::get_int(p, "latency", where, 1));
  }
  return g;
}

inline marked_graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

inline detail::json graph_to_json(const marked_graph& g) {
  detail::json doc;
  doc["transitions"] = detail::json::array();
  doc["places"] = detail::json::array();
  for (const auto& t : g.transitions()) {
    detail::json e{{"id", t.id}};
    if (t.latency != 0) e["latency"] = t.latency;
    doc["transitions"].push_back(e);
  }
  for (const auto& p : g.places()) {
    detail::json e{{"id", p.id},
                   {"from", g.transition_at(p.from).id},
                   {"to", g.transition_at(p.to).id},
                   {"tokens", p.tokens}};
    if (p.latency != 1) e["latency"] = p.latency;
    doc["places"].push_back(e);
  }
  return doc;
}

inline std::string serialize_graph(const marked_graph& g) { return graph_to_json(g).dump(2) + "\n"; }

inline detail::json provenance_to_json(const provenance_map& prov) {
  detail::json out = detail::json::array();
  for (const auto& [id, o] : prov.entries())
    out.push_back({{"id", id}, {"origin", o.id.empty() ? detail::json(nullptr) : detail::json(o.id)},
                   {"kind", to_string(o.kind)}, {"ordinal", o.ordinal}});
  return out;
}

inline detail::json report_to_json(const schedule_report& rep) {
  const marked_graph& g = rep.graph;
  auto original = [&](const std::string& id) { return !rep.provenance.contains(id) || !rep.provenance.at(id).synthetic(); };
  detail::json doc;
  doc["k"] = rep.kp.k;
  doc["p"] = rep.kp.p;
  doc["alpha"] = rep.alpha ? detail::json(*rep.alpha) : detail::json(nullptr);
  doc["initial_length"] = rep.initial_length;
  doc["phase"] = rep.phase;
  doc["transitions"] = detail::json::object();
  doc["places"] = detail::json::object();
  detail::json synthetic{{"transitions", detail::json::object()}, {"places", detail::json::object()}};
  for (transition_index t = 0; t < g.transition_count(); ++t) {
    const auto& id = g.transition_at(t).id;
    detail::json e{{"schedule", rep.schedules[t].str()}};
    if (original(id)) {
      doc["transitions"][id] = e;
    } else {
      e["origin"] = rep.provenance.at(id).id;
      e["kind"] = to_string(rep.provenance.at(id).kind);
      synthetic["transitions"][id] = e;
    }
  }
  for (place_index p = 0; p < g.place_count(); ++p) {
    const auto& id = g.place_at(p).id;
    detail::json e{{"D", rep.delays.full[p]}, {"size", rep.sizes[p]}, {"tokens", rep.m_periodic[p]}};
    if (original(id)) {
      doc["places"][id] = e;
    } else {
      e["origin"] = rep.provenance.at(id).id;
      e["kind"] = to_string(rep.provenance.at(id).kind);
      synthetic["places"][id] = e;
    }
  }
  doc["synthetic"] = synthetic;
  return doc;
}

inline std::string format_report(const schedule_report& rep) {
  const marked_graph& g = rep.graph;
  auto original = [&](const std::string& id) { return !rep.provenance.contains(id) || !rep.provenance.at(id).synthetic(); };
  std::ostringstream os;
  os << "k=" << rep.kp.k << " p=" << rep.kp.p << " alpha=" << (rep.alpha ? std::to_string(*rep.alpha) : "none")
     << " initial_length=" << rep.initial_length << "\n";
  for (const bool pass : {true, false}) {
    if (!pass) os << "synthetic:\n";
    os << "transitions:\n";
    for (transition_index t = 0; t < g.transition_count(); ++t) {
      const auto& id = g.transition_at(t).id;
      if (original(id) != pass) continue;
      os << "  " << id << " " << rep.schedules[t].str();
      if (!pass) os << " (from " << rep.provenance.at(id).id << ")";
      os << "\n";
    }
    os << "places:\n";
    for (place_index p = 0; p < g.place_count(); ++p) {
      const auto& id = g.place_at(p).id;
      if (original(id) != pass) continue;
      os << "  " << id << " D=" << rep.delays.full[p] << " size=" << rep.sizes[p] << " tokens=" << rep.m_periodic[p];
      if (!pass) {
        const auto& from = rep.provenance.at(id).id;
        os << " (from " << (from.empty() ? std::string("closure") : from) << ")";
      }
      os << "\n";
    }
  }
  return os.str();
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Extra labels for the DOT rendering, keyed by element id.
struct dot_labels {
  std::map<std::string, std::string> transitions;
  std::map<std::string, std::string> places;
};

/// Transitions are boxes, places small circles; synthetic elements are dashed.
inline std::string to_dot(const marked_graph& g, const provenance_map* prov = nullptr, const dot_labels& labels = {}) {
  auto synthetic = [&](const std::string& id) { return prov && prov->contains(id) && prov->at(id).synthetic(); };
  auto extra = [](const std::map<std::string, std::string>& m, const std::string& id) {
    const auto it = m.find(id);
    return it == m.end() ? std::string() : "\\n" + it->second;
  };
  std::ostringstream os;
  os << "digraph marked_graph {\n  rankdir=LR;\n";
  for (const auto& t : g.transitions()) {
    os << "  " << detail::dot_quote("t:" + t.id) << " [shape=box, label=" << detail::dot_quote(t.id + extra(labels.transitions, t.id));
    if (synthetic(t.id)) os << ", style=dashed";
    os << "];\n";
  }
  for (const auto& p : g.places()) {
    std::string label = p.id + " (" + std::to_string(p.tokens) + ")";
    if (p.latency != 1) label += " L=" + std::to_string(p.latency);
    os << "  " << detail::dot_quote("p:" + p.id) << " [shape=circle, label=" << detail::dot_quote(label + extra(labels.places, p.id));
    if (synthetic(p.id)) os << ", style=dashed";
    os << "];\n";
    const std::string style = synthetic(p.id) ? " [style=dashed]" : "";
    os << "  " << detail::dot_quote("t:" + g.transition_at(p.from).id) << " -> " << detail::dot_quote("p:" + p.id) << style << ";\n";
    os << "  " << detail::dot_quote("p:" + p.id) << " -> " << detail::dot_quote("t:" + g.transition_at(p.to).id) << style << ";\n";
  }
  os << "}\n";
  return os.str();
}

inline std::string report_to_dot(const schedule_report& rep) {
  dot_labels labels;
  for (transition_index t = 0; t < rep.graph.transition_count(); ++t)
    labels.transitions[rep.graph.transition_at(t).id] = rep.schedules[t].str();
  for (place_index p = 0; p < rep.graph.place_count(); ++p)
    labels.places[rep.graph.place_at(p).id] =
        "D=" + std::to_string(rep.delays.full[p]) + " size=" + std::to_string(rep.sizes[p]);
  return to_dot(rep.graph, &rep.provenance, labels);
}

}  // namespace kpsched
