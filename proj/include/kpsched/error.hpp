#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpsched {

/// Base of every error raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input graph violates a structural rule (unknown id, duplicate id, bad latency...).
struct structural_error : error {
  using error::error;
};

struct not_live : error {
  using error::error;
};

struct not_strongly_connected : error {
  using error::error;
};

struct not_plain : error {
  using error::error;
};

struct not_closed : error {
  using error::error;
};

/// Throughput above one: some transition would have to fire twice per instant.
struct throughput_too_high : error {
  using error::error;
};

struct cycle_limit_exceeded : error {
  explicit cycle_limit_exceeded(std::size_t cap)
      : error("elementary cycle enumeration exceeded the cap of " + std::to_string(cap) + " cycles"),
        cap(cap) {}
  std::size_t cap;
};

// words

struct undefined_transposition : error {
  using error::error;
};

struct not_balanced : error {
  using error::error;
};

struct not_coprime : error {
  using error::error;
};

// simulator

struct illegal_firing : error {
  using error::error;
};

struct horizon_exceeded : error {
  using error::error;
};

/// A replayed schedule asked for a firing that the token game does not allow.
struct schedule_invalid : error {
  schedule_invalid(std::size_t step, std::string transition)
      : error("schedule invalid at step " + std::to_string(step) + ": transition '" + transition +
              "' is not firable"),
        step(step),
        transition(std::move(transition)) {}
  std::size_t step;
  std::string transition;
};

// scheduler

struct inconsistent_propagation : error {
  using error::error;
};

struct infeasible_initialization : error {
  using error::error;
};

/// Broken internal invariant. Seeing one of these is a bug.
struct internal_error : error {
  using error::error;
};

}  // namespace kpsched
