#pragma once

// Deliberately naive reference implementations used to check the library.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kpsched/kpsched.hpp"

namespace oracle {

using kpsched::marked_graph;
using kpsched::place_index;
using kpsched::transition_index;

/// Elementary cycles as place lists rotated to start at their smallest place,
/// found by exhaustive path search from every transition.
inline std::set<std::vector<place_index>> cycles(const marked_graph& g) {
  std::set<std::vector<place_index>> out;
  const std::size_t n = g.transition_count();
  for (transition_index s = 0; s < n; ++s) {
    std::vector<bool> used(n, false);
    std::vector<place_index> path;
    std::function<void(transition_index)> dfs = [&](transition_index t) {
      for (const place_index p : g.outputs(t)) {
        const transition_index next = g.place_at(p).to;
        path.push_back(p);
        if (next == s) {
          auto c = path;
          std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
          out.insert(c);
        } else if (!used[next]) {
          used[next] = true;
          dfs(next);
          used[next] = false;
        }
        path.pop_back();
      }
    };
    used[s] = true;
    dfs(s);
  }
  return out;
}

/// reach[a][b]: b is reachable from a by a (possibly empty) path.
inline std::vector<std::vector<bool>> reachability(const marked_graph& g) {
  const std::size_t n = g.transition_count();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& p : g.places()) r[p.from][p.to] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

/// Balanced: any two cyclic factors of equal length differ by at most one 1.
inline bool balanced(const std::string& u) {
  const std::size_t n = u.size();
  for (std::size_t len = 1; len <= n; ++len) {
    int lo = 1 << 30, hi = -1;
    for (std::size_t i = 0; i < n; ++i) {
      int ones = 0;
      for (std::size_t j = 0; j < len; ++j) ones += u[(i + j) % n] == '1';
      lo = std::min(lo, ones);
      hi = std::max(hi, ones);
    }
    if (hi - lo > 1) return false;
  }
  return true;
}

/// S_k^p by filtering all 2^p words.
inline std::vector<std::string> balanced_words(int k, int p) {
  std::vector<std::string> out;
  for (std::uint32_t m = 0; m < (1u << p); ++m) {
    std::string u;
    for (int i = p - 1; i >= 0; --i) u += (m >> i) & 1u ? '1' : '0';
    if (std::count(u.begin(), u.end(), '1') == k && balanced(u)) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Smallest a in [1, p) with -k a = 1 mod p, by scanning.
inline std::int64_t alpha(std::int64_t k, std::int64_t p) {
  for (std::int64_t a = 1; a < p; ++a)
    if ((((-k * a) % p) + p) % p == 1 % p) return a;
  return -1;
}

/// Rotation by definition: rho(u.b) = b.u, applied n times (n may be negative).
inline std::string rotate(std::string u, std::int64_t n) {
  const auto len = static_cast<std::int64_t>(u.size());
  n = ((n % len) + len) % len;
  for (std::int64_t i = 0; i < n; ++i) u = u.back() + u.substr(0, u.size() - 1);
  return u;
}

}  // namespace oracle
