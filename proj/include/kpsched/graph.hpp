#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kpsched/error.hpp"

namespace kpsched {

using transition_index = std::size_t;
using place_index = std::size_t;

/// Token count per place, indexed by place index.
using marking = std::vector<std::int64_t>;

/// One flag per transition, indexed by transition index.
using firing_set = std::vector<bool>;

struct transition {
  std::string id;
  std::int64_t latency = 0;  // computation latency, in instants
};

/// A place has exactly one producer and one consumer.
struct place {
  std::string id;
  transition_index from = 0;
  transition_index to = 0;
  std::int64_t tokens = 0;
  std::int64_t latency = 1;  // communication latency, at least one instant
};

/// Marked graph with latencies. Transition and place ids share one namespace.
///
/// Elements are only ever appended, so indices handed out by add_* stay valid.
/// The initial marking is the `tokens` field of each place.
class marked_graph {
 public:
  transition_index add_transition(std::string id, std::int64_t latency = 0) {
    if (latency < 0) throw structural_error("transition '" + id + "' has a negative latency");
    claim_id(id);
    const transition_index t = transitions_.size();
    transition_by_id_.emplace(id, t);
    transitions_.push_back({std::move(id), latency});
    inputs_.emplace_back();
    outputs_.emplace_back();
    return t;
  }

  place_index add_place(std::string id, transition_index from, transition_index to,
                        std::int64_t tokens = 0, std::int64_t latency = 1) {
    if (from >= transitions_.size() || to >= transitions_.size())
      throw structural_error("place '" + id + "' refers to a transition index out of range");
    if (tokens < 0) throw structural_error("place '" + id + "' has a negative token count");
    if (latency < 1) throw structural_error("place '" + id + "' has a communication latency below 1");
    claim_id(id);
    const place_index p = places_.size();
    place_by_id_.emplace(id, p);
    places_.push_back({std::move(id), from, to, tokens, latency});
    outputs_[from].push_back(p);
    inputs_[to].push_back(p);
    return p;
  }

  place_index add_place(std::string id, std::string_view from, std::string_view to,
                        std::int64_t tokens = 0, std::int64_t latency = 1) {
    const auto f = find_transition(from);
    const auto t = find_transition(to);
    if (!f) throw structural_error("place '" + id + "' has unknown producer '" + std::string(from) + "'");
    if (!t) throw structural_error("place '" + id + "' has unknown consumer '" + std::string(to) + "'");
    return add_place(std::move(id), *f, *t, tokens, latency);
  }

  const std::vector<transition>& transitions() const { return transitions_; }
  const std::vector<place>& places() const { return places_; }
  const transition& transition_at(transition_index t) const { return transitions_.at(t); }
  const place& place_at(place_index p) const { return places_.at(p); }
  std::size_t transition_count() const { return transitions_.size(); }
  std::size_t place_count() const { return places_.size(); }

  /// Input places of t, in insertion order.
  const std::vector<place_index>& inputs(transition_index t) const { return inputs_.at(t); }
  /// Output places of t, in insertion order.
  const std::vector<place_index>& outputs(transition_index t) const { return outputs_.at(t); }

  std::optional<transition_index> find_transition(std::string_view id) const {
    const auto it = transition_by_id_.find(std::string(id));
    if (it == transition_by_id_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<place_index> find_place(std::string_view id) const {
    const auto it = place_by_id_.find(std::string(id));
    if (it == place_by_id_.end()) return std::nullopt;
    return it->second;
  }
  bool has_id(std::string_view id) const {
    return find_transition(id).has_value() || find_place(id).has_value();
  }

  marking initial_marking() const {
    marking m(places_.size());
    for (place_index p = 0; p < places_.size(); ++p) m[p] = places_[p].tokens;
    return m;
  }

  void set_tokens(place_index p, std::int64_t tokens) {
    if (tokens < 0) throw structural_error("negative token count for place '" + places_.at(p).id + "'");
    places_.at(p).tokens = tokens;
  }

  void set_marking(const marking& m) {
    if (m.size() != places_.size()) throw structural_error("marking size does not match the place set");
    for (place_index p = 0; p < places_.size(); ++p) set_tokens(p, m[p]);
  }

  std::int64_t total_tokens() const {
    std::int64_t n = 0;
    for (const auto& p : places_) n += p.tokens;
    return n;
  }

  /// Every computation latency is 0 and every communication latency is 1.
  bool is_plain() const {
    for (const auto& t : transitions_)
      if (t.latency != 0) return false;
    for (const auto& p : places_)
      if (p.latency != 1) return false;
    return true;
  }

  bool is_source(transition_index t) const { return inputs_.at(t).empty(); }
  bool is_sink(transition_index t) const { return outputs_.at(t).empty(); }

  friend bool operator==(const marked_graph& a, const marked_graph& b) {
    if (a.transitions_.size() != b.transitions_.size() || a.places_.size() != b.places_.size())
      return false;
    for (std::size_t i = 0; i < a.transitions_.size(); ++i) {
      const auto& x = a.transitions_[i];
      const auto& y = b.transitions_[i];
      if (x.id != y.id || x.latency != y.latency) return false;
    }
    for (std::size_t i = 0; i < a.places_.size(); ++i) {
      const auto& x = a.places_[i];
      const auto& y = b.places_[i];
      if (x.id != y.id || x.from != y.from || x.to != y.to || x.tokens != y.tokens ||
          x.latency != y.latency)
        return false;
    }
    return true;
  }

 private:
  void claim_id(const std::string& id) {
    if (id.empty()) throw structural_error("empty element id");
    if (has_id(id)) throw structural_error("duplicate id '" + id + "'");
  }

  std::vector<transition> transitions_;
  std::vector<place> places_;
  std::vector<std::vector<place_index>> inputs_;
  std::vector<std::vector<place_index>> outputs_;
  std::unordered_map<std::string, transition_index> transition_by_id_;
  std::unordered_map<std::string, place_index> place_by_id_;
};

}  // namespace kpsched
