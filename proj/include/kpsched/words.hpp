#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "kpsched/error.hpp"
#include "kpsched/rational.hpp"

namespace kpsched {

/// Finite word over {0,1}. Letter access is 1-based: `u(1)` is the first letter.
class binary_word {
 public:
  binary_word() = default;
  explicit binary_word(std::vector<bool> bits) : bits_(std::move(bits)) {}

  /// Parses a string of '0' and '1'.
  static binary_word parse(std::string_view s) {
    std::vector<bool> bits;
    bits.reserve(s.size());
    for (const char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("not a binary word: '" + std::string(s) + "'");
      bits.push_back(c == '1');
    }
    return binary_word(std::move(bits));
  }

  static binary_word repeat(bool letter, std::size_t n) { return binary_word(std::vector<bool>(n, letter)); }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  bool operator()(std::size_t i) const {
    if (i < 1 || i > bits_.size()) throw std::out_of_range("letter index out of range");
    return bits_[i - 1];
  }

  std::size_t ones() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }
  std::size_t zeros() const { return size() - ones(); }

  rational slope() const {
    if (empty()) throw std::domain_error("slope of the empty word");
    return {static_cast<std::int64_t>(ones()), static_cast<std::int64_t>(size())};
  }

  const std::vector<bool>& bits() const { return bits_; }

  binary_word power(std::size_t x) const {
    std::vector<bool> out;
    out.reserve(bits_.size() * x);
    for (std::size_t i = 0; i < x; ++i) out.insert(out.end(), bits_.begin(), bits_.end());
    return binary_word(std::move(out));
  }

  friend binary_word operator+(const binary_word& a, const binary_word& b) {
    std::vector<bool> out(a.bits_);
    out.insert(out.end(), b.bits_.begin(), b.bits_.end());
    return binary_word(std::move(out));
  }

  void push_back(bool b) { bits_.push_back(b); }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (const bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const binary_word&, const binary_word&) = default;

  /// Lexicographic order with 0 < 1; a proper prefix is smaller.
  friend std::strong_ordering operator<=>(const binary_word& u, const binary_word& v) {
    const std::size_t n = std::min(u.size(), v.size());
    for (std::size_t i = 0; i < n; ++i)
      if (u.bits_[i] != v.bits_[i]) return u.bits_[i] ? std::strong_ordering::greater : std::strong_ordering::less;
    return u.size() <=> v.size();
  }

  friend std::ostream& operator<<(std::ostream& os, const binary_word& u) { return os << u.str(); }

 private:
  std::vector<bool> bits_;
};

inline std::strong_ordering compare_lex(const binary_word& u, const binary_word& v) { return u <=> v; }

/// Forward rotation by n (any sign): rho(u.b) = b.u, so the result at i is u(i-n).
inline binary_word rotate(const binary_word& u, std::int64_t n) {
  if (u.empty()) return u;
  const auto len = static_cast<std::int64_t>(u.size());
  const std::int64_t shift = ((n % len) + len) % len;
  std::vector<bool> out(u.size());
  for (std::int64_t i = 0; i < len; ++i) out[static_cast<std::size_t>((i + shift) % len)] = u.bits()[static_cast<std::size_t>(i)];
  return binary_word(std::move(out));
}

/// Distinct rotations of u, sorted lexicographically.
inline std::vector<binary_word> orbit(const binary_word& u) {
  std::vector<binary_word> out;
  for (std::size_t n = 0; n < std::max<std::size_t>(u.size(), 1); ++n) out.push_back(rotate(u, static_cast<std::int64_t>(n)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Equal-length factors of u^omega differ by at most one in their number of ones.
/// Cyclic windows of lengths 1..|u| cover every factor length.
inline bool is_balanced(const binary_word& u) {
  if (u.empty()) throw std::domain_error("balance of the empty word");
  const std::size_t n = u.size();
  std::vector<std::size_t> prefix(2 * n + 1, 0);
  for (std::size_t i = 0; i < 2 * n; ++i) prefix[i + 1] = prefix[i] + (u.bits()[i % n] ? 1 : 0);
  for (std::size_t len = 1; len <= n; ++len) {
    std::size_t lo = n, hi = 0;
    for (std::size_t start = 0; start < n; ++start) {
      const std::size_t c = prefix[start + len] - prefix[start];
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    if (hi - lo > 1) return false;
  }
  return true;
}

/// u(i) = floor(i*k/p) - floor((i-1)*k/p), i = 1..p.
inline binary_word mechanical_word(std::int64_t k, std::int64_t p) {
  if (p <= 0 || k <= 0 || k > p) throw std::domain_error("mechanical word needs 0 < k <= p");
  std::vector<bool> bits(static_cast<std::size_t>(p));
  for (std::int64_t i = 1; i <= p; ++i) bits[static_cast<std::size_t>(i - 1)] = (i * k) / p - ((i - 1) * k) / p == 1;
  return binary_word(std::move(bits));
}

/// Shortest v with u = v^x.
inline std::pair<binary_word, std::size_t> primitive_root(const binary_word& u) {
  const std::size_t n = u.size();
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = d; i < n && periodic; ++i) periodic = u.bits()[i] == u.bits()[i - d];
    if (periodic) return {binary_word(std::vector<bool>(u.bits().begin(), u.bits().begin() + static_cast<std::ptrdiff_t>(d))), n / d};
  }
  return {u, 1};
}

/// The set S_k^p of balanced words of length p with k ones, sorted.
inline std::vector<binary_word> balanced_words(std::int64_t k, std::int64_t p) {
  if (k == 0 && p > 0) return {binary_word::repeat(false, static_cast<std::size_t>(p))};
  return orbit(mechanical_word(k, p));
}

/// Lowest element of S_k^p, of the form 0.w.1 when 0 < k < p.
inline binary_word balanced_infimum(std::int64_t k, std::int64_t p) { return balanced_words(k, p).front(); }

/// Swaps the factor 10 at positions (delta, delta+1) into 01. At delta = |u|
/// a word 0.w.1 becomes 1.w.0.
inline binary_word transpose_at(const binary_word& u, std::size_t delta) {
  const std::size_t n = u.size();
  std::vector<bool> bits = u.bits();
  if (delta >= 1 && delta < n && bits[delta - 1] && !bits[delta]) {
    bits[delta - 1] = false;
    bits[delta] = true;
    return binary_word(std::move(bits));
  }
  if (delta == n && n >= 2 && !bits.front() && bits.back()) {
    bits.front() = true;
    bits.back() = false;
    return binary_word(std::move(bits));
  }
  throw undefined_transposition("transposition of " + u.str() + " at " + std::to_string(delta) + " is not defined");
}

/// Location of the unique transposition that keeps a primitive balanced word
/// balanced. For a non-primitive word the location is taken in its primitive root.
inline std::size_t canonical_delta(const binary_word& u) {
  if (u.empty() || !is_balanced(u)) throw not_balanced(u.str() + " is not balanced");
  const auto [root, x] = primitive_root(u);
  const auto k = static_cast<std::int64_t>(root.ones());
  const auto p = static_cast<std::int64_t>(root.size());
  if (k == 0 || k == p) throw undefined_transposition("no transposition in a constant word " + u.str());
  const binary_word inf = balanced_infimum(k, p);
  for (std::int64_t n = 0; n < p; ++n)
    if (rotate(inf, n) == root) return n == 0 ? static_cast<std::size_t>(p) : static_cast<std::size_t>(n);
  throw internal_error("balanced word " + root.str() + " not found in the orbit of " + inf.str());
}

/// tau^n on S_k^p; negative n applies the inverse. Acts on the primitive root.
inline binary_word balanced_transpose(const binary_word& u, std::int64_t n) {
  if (u.empty() || !is_balanced(u)) throw not_balanced(u.str() + " is not balanced");
  auto [w, x] = primitive_root(u);
  if (n >= 0) {
    for (std::int64_t i = 0; i < n; ++i) w = transpose_at(w, canonical_delta(w));
  } else {
    const auto candidates = orbit(w);
    for (std::int64_t i = 0; i < -n; ++i) {
      const auto it = std::find_if(candidates.begin(), candidates.end(),
                                   [&](const binary_word& z) { return transpose_at(z, canonical_delta(z)) == w; });
      if (it == candidates.end()) throw internal_error("no preimage under transposition for " + w.str());
      w = *it;
    }
  }
  return w.power(x);
}

struct alpha_coefficient {
  std::int64_t k = 0;
  std::int64_t p = 0;
  std::int64_t value = 0;  // (-k * value) mod p == 1
};

/// Inverse of -k modulo p, in [1, p-1].
inline alpha_coefficient alpha(std::int64_t k, std::int64_t p) {
  if (k <= 0 || p <= 0 || k >= p) throw std::domain_error("alpha needs 0 < k < p");
  if (std::gcd(k, p) != 1)
    throw not_coprime("alpha needs coprime k and p, got " + std::to_string(k) + "," + std::to_string(p));
  // extended Euclid on (p - k, p)
  std::int64_t old_r = p - k, r = p, old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  std::int64_t a = ((old_s % p) + p) % p;
  if (p == 1) a = 0;
  return {k, p, a};
}

/// Ultimately k-periodic word initial.(steady)^omega.
class periodic_schedule {
 public:
  periodic_schedule() = default;
  periodic_schedule(binary_word initial, binary_word steady) : initial_(std::move(initial)), steady_(std::move(steady)) {
    if (steady_.empty()) throw std::invalid_argument("steady part of a schedule must be nonempty");
    if (steady_.ones() == 0) throw std::invalid_argument("steady part of a schedule needs at least one 1");
  }

  const binary_word& initial() const { return initial_; }
  const binary_word& steady() const { return steady_; }
  std::size_t periodicity() const { return steady_.ones(); }
  std::size_t period() const { return steady_.size(); }
  rational slope() const { return steady_.slope(); }

  /// Letter at instant i (1-based) of the infinite word.
  bool operator()(std::size_t i) const {
    if (i < 1) throw std::out_of_range("letter index out of range");
    if (i <= initial_.size()) return initial_(i);
    return steady_((i - initial_.size() - 1) % steady_.size() + 1);
  }

  /// Renders as "u.(v)*", or "(v)*" when the initial part is empty.
  std::string str() const {
    std::string s = initial_.empty() ? std::string() : initial_.str() + ".";
    return s + "(" + steady_.str() + ")*";
  }

  static periodic_schedule parse(std::string_view s) {
    auto fail = [&]() -> periodic_schedule { throw std::invalid_argument("not a periodic schedule: '" + std::string(s) + "'"); };
    if (s.size() < 4 || s.substr(s.size() - 2) != ")*") return fail();
    const auto open = s.find('(');
    if (open == std::string_view::npos) return fail();
    binary_word initial;
    if (open > 0) {
      if (s[open - 1] != '.') return fail();
      initial = binary_word::parse(s.substr(0, open - 1));
      if (initial.empty()) return fail();
    }
    return periodic_schedule(initial, binary_word::parse(s.substr(open + 1, s.size() - open - 3)));
  }

  friend bool operator==(const periodic_schedule&, const periodic_schedule&) = default;

 private:
  binary_word initial_;
  binary_word steady_;
};

}  // namespace kpsched
